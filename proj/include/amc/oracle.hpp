#pragma once

// Reference prices: Black-Scholes European put and a fully implicit
// finite-difference American/Bermudan put on a uniform spot grid.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "amc/errors.hpp"
#include "amc/market.hpp"
#include "amc/result.hpp"

namespace amc {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// K e^{-rT} N(-d2) - S N(-d1). Zero volatility gives the discounted forward
/// intrinsic value, zero maturity the plain intrinsic value.
inline double european_put_closed_form(const MarketParams& p) {
    if (p.maturity <= 0.0) return std::max(p.strike - p.spot, 0.0);
    const double df = std::exp(-p.rate * p.maturity);
    if (p.vol <= 0.0) return std::max(p.strike * df - p.spot, 0.0);
    const double sd = p.vol * std::sqrt(p.maturity);
    const double d1 = (std::log(p.spot / p.strike) + (p.rate + 0.5 * p.vol * p.vol) * p.maturity) / sd;
    const double d2 = d1 - sd;
    return p.strike * df * normal_cdf(-d2) - p.spot * normal_cdf(-d1);
}

struct FdGrid {
    long n_time_steps = 40'000;
    int n_space_steps = 1'000;
    double s_max = 160.0;

    /// s_max = 4 K.
    static FdGrid for_strike(double strike, long n_time = 40'000, int n_space = 1'000) {
        return {n_time, n_space, 4.0 * strike};
    }

    void validate(double strike) const {
        if (n_time_steps < 1) throw std::invalid_argument("n_time_steps must be >= 1");
        if (n_space_steps < 3) throw std::invalid_argument("n_space_steps must be >= 3");
        if (!(s_max > strike)) throw std::invalid_argument("s_max must exceed the strike");
    }
};

enum class FdConstraint {
    projection,  ///< implicit solve, then V = max(V, payoff)
    psor,        ///< projected SOR on the linear complementarity problem
};

struct FdResult {
    double price = 0.0;
    /// Largest grid spot where the option is exercised, per time level where
    /// exercise is allowed (levels t_n = n T / N_t, n = 0..N_t-1).
    std::vector<BoundaryPoint> boundary;
};

namespace detail {

/// Backward time stepping. `exercise_at(n)` tells whether early exercise is
/// allowed at time level n (t_n = n * dt, n < N_t); maturity is the terminal
/// payoff.
inline FdResult solve_put_fd(const MarketParams& p, const FdGrid& g, FdConstraint method,
                             const std::function<bool(long)>& exercise_at) {
    p.validate();
    g.validate(p.strike);
    const int ns = g.n_space_steps;
    const long nt = g.n_time_steps;
    const double ds = g.s_max / ns;
    const double dt = p.maturity / static_cast<double>(nt);
    const double k = p.strike;

    std::vector<double> spot(static_cast<std::size_t>(ns + 1));
    std::vector<double> payoff(spot.size());
    for (int i = 0; i <= ns; ++i) {
        spot[static_cast<std::size_t>(i)] = i * ds;
        payoff[static_cast<std::size_t>(i)] = std::max(k - i * ds, 0.0);
    }

    // Operator coefficients per node; central differences where they keep the
    // scheme monotone, one-sided upwind otherwise.
    std::vector<double> lo(spot.size()), di(spot.size()), up(spot.size());
    for (int i = 1; i < ns; ++i) {
        const double diff = 0.5 * p.vol * p.vol * static_cast<double>(i) * i;
        const double drift = p.rate * i;
        double a, c;
        if (diff >= 0.5 * std::abs(drift)) {
            a = diff - 0.5 * drift;
            c = diff + 0.5 * drift;
        } else if (drift >= 0.0) {
            a = diff;
            c = diff + drift;
        } else {
            a = diff - drift;
            c = diff;
        }
        const auto s = static_cast<std::size_t>(i);
        lo[s] = -dt * a;
        up[s] = -dt * c;
        di[s] = 1.0 + dt * (a + c + p.rate);
    }

    std::vector<double> v = payoff;
    std::vector<double> rhs(spot.size()), cp(spot.size()), dp(spot.size());
    FdResult out;

    for (long n = nt - 1; n >= 0; --n) {
        const double tau = p.maturity - static_cast<double>(n) * dt;
        const double left = k * std::exp(-p.rate * tau);
        const bool exercise = exercise_at(n);
        rhs = v;

        if (exercise && method == FdConstraint::psor) {
            v[0] = std::max(left, payoff[0]);
            v[static_cast<std::size_t>(ns)] = 0.0;
            constexpr double omega = 1.2;
            constexpr int max_sweeps = 10'000;
            const double tol = 1e-12 * k;
            int sweep = 0;
            for (; sweep < max_sweeps; ++sweep) {
                double change = 0.0;
                for (int i = 1; i < ns; ++i) {
                    const auto s = static_cast<std::size_t>(i);
                    const double gs = (rhs[s] - lo[s] * v[s - 1] - up[s] * v[s + 1]) / di[s];
                    const double nv = std::max(payoff[s], v[s] + omega * (gs - v[s]));
                    change = std::max(change, std::abs(nv - v[s]));
                    v[s] = nv;
                }
                if (change < tol) break;
            }
            if (sweep == max_sweeps) throw PsorDivergence(n);
        } else {
            // Thomas algorithm on interior nodes with Dirichlet ends.
            v[0] = left;
            v[static_cast<std::size_t>(ns)] = 0.0;
            rhs[1] -= lo[1] * v[0];
            rhs[static_cast<std::size_t>(ns - 1)] -= up[static_cast<std::size_t>(ns - 1)] * v[static_cast<std::size_t>(ns)];
            cp[1] = up[1] / di[1];
            dp[1] = rhs[1] / di[1];
            for (int i = 2; i < ns; ++i) {
                const auto s = static_cast<std::size_t>(i);
                const double m = di[s] - lo[s] * cp[s - 1];
                cp[s] = up[s] / m;
                dp[s] = (rhs[s] - lo[s] * dp[s - 1]) / m;
            }
            v[static_cast<std::size_t>(ns - 1)] = dp[static_cast<std::size_t>(ns - 1)];
            for (int i = ns - 2; i >= 1; --i) {
                const auto s = static_cast<std::size_t>(i);
                v[s] = dp[s] - cp[s] * v[s + 1];
            }
            if (exercise)
                for (std::size_t s = 0; s < v.size(); ++s) v[s] = std::max(v[s], payoff[s]);
        }

        if (exercise) {
            std::optional<double> b;
            for (int i = 0; i <= ns; ++i) {
                const auto s = static_cast<std::size_t>(i);
                if (spot[s] < k && v[s] <= payoff[s]) b = spot[s];
            }
            out.boundary.push_back({static_cast<double>(n) * dt, b});
        }
    }
    std::reverse(out.boundary.begin(), out.boundary.end());

    if (p.spot >= g.s_max) {
        out.price = 0.0;
    } else {
        const double x = p.spot / ds;
        const auto i = static_cast<std::size_t>(std::floor(x));
        const double w = x - static_cast<double>(i);
        out.price = (1.0 - w) * v[i] + w * v[std::min(i + 1, v.size() - 1)];
    }
    return out;
}

}  // namespace detail

/// American put, exercise allowed at every time level.
inline FdResult american_put_fd(const MarketParams& p, const FdGrid& g,
                                FdConstraint method = FdConstraint::projection) {
    return detail::solve_put_fd(p, g, method, [](long) { return true; });
}

/// Same scheme without any early exercise.
inline double european_put_fd(const MarketParams& p, const FdGrid& g) {
    return detail::solve_put_fd(p, g, FdConstraint::projection, [](long) { return false; }).price;
}

/// Exercise only at the schedule's dates before maturity. Every date must sit
/// on a time level of the grid.
inline FdResult american_put_fd_bermudan(const MarketParams& p, const FdGrid& g, const ExerciseSchedule& schedule,
                                         FdConstraint method = FdConstraint::projection) {
    schedule.check_consistent(p);
    const double dt = p.maturity / static_cast<double>(g.n_time_steps);
    std::vector<char> allowed(static_cast<std::size_t>(g.n_time_steps), 0);
    for (double t : schedule.dates()) {
        const double level = t / dt;
        const long n = std::lround(level);
        if (std::abs(level - static_cast<double>(n)) > 1e-8 * std::max(1.0, level))
            throw std::invalid_argument("exercise date is not on the finite-difference time grid");
        if (n < g.n_time_steps) allowed[static_cast<std::size_t>(n)] = 1;
    }
    return detail::solve_put_fd(p, g, method, [&](long n) { return allowed[static_cast<std::size_t>(n)] != 0; });
}

}  // namespace amc
