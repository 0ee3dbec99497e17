#pragma once

// Iterative, fully parallel American Monte Carlo.
//
// Paths are consumed in n batches of m. Batch i is valued with the exercise
// policy fitted on batches 1..i-1, and only its normal-equation aggregates and
// price sums survive it, so no path is ever stored. Aggregates from earlier
// batches are damped by w_UV(i) before batch i is added, and batch prices
// enter the final average with weight w~_i.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "amc/errors.hpp"
#include "amc/market.hpp"
#include "amc/product.hpp"
#include "amc/regression.hpp"
#include "amc/result.hpp"
#include "amc/workers.hpp"

namespace amc {

struct IterationPlan {
    int n_iterations = 100;
    long long paths_per_iteration = 1000;

    long long total_paths() const noexcept { return n_iterations * paths_per_iteration; }

    /// n iterations of N/n paths; N must be a multiple of n.
    static IterationPlan from_total(long long total_paths, int n_iterations) {
        if (n_iterations < 1) throw ConfigError("iterations", "must be >= 1");
        if (total_paths < n_iterations || total_paths % n_iterations != 0)
            throw ConfigError("paths", "must be a positive multiple of the iteration count");
        return {n_iterations, total_paths / n_iterations};
    }

    void validate() const {
        if (n_iterations < 1) throw ConfigError("iterations", "must be >= 1");
        if (paths_per_iteration < 1) throw ConfigError("paths", "paths per iteration must be >= 1");
    }
};

/// U/V damping factor applied to the running aggregates at iteration i.
inline double weight_uv_step(int i, double lambda, double mu) { return 1.0 - lambda * std::exp(-i / mu); }

/// Weight of iteration i's paths in the price average; 1/2 at i = 1, rising to 1.
inline double weight_price(int i, double nu) { return 1.0 - 0.5 * (1.0 - std::tanh(nu * (i - 1))); }

/// Gaussian bump of width beta centred on the exercise boundary.
inline double boundary_weight(double spot, double boundary, double beta) {
    const double z = (spot - boundary) / beta;
    return std::exp(-0.5 * z * z);
}

struct WeightScheme {
    double lambda = 2.0;
    double mu = 2.0;
    double nu = 0.99;
    double beta = 8.0;                  // boundary width in price units
    std::vector<double> beta_per_date;  // overrides `beta` when non-empty (dates 1..M)
    double beta_shrink = 1.0;           // beta multiplier per iteration after the second
    bool boundary_weights = true;       // false: in-the-money indicator throughout

    /// lambda = mu = 2, nu = 0.99, beta = 0.2 K.
    static WeightScheme defaults_for_strike(double strike) {
        WeightScheme w;
        w.beta = 0.2 * strike;
        return w;
    }

    double beta_at(int k, int iteration) const {
        const double base = beta_per_date.empty() ? beta : beta_per_date.at(static_cast<std::size_t>(k - 1));
        return base * std::pow(beta_shrink, std::max(0, iteration - 2));
    }

    /// The damping factor is first applied at i = 2, so w_UV(1) may be negative.
    void validate(int n_iterations, int n_dates) const {
        if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("lambda", "must be finite and >= 0");
        if (!std::isfinite(mu) || !(mu > 0.0)) throw ConfigError("mu", "must be finite and > 0");
        if (!std::isfinite(nu) || nu < 0.0) throw ConfigError("nu", "must be finite and >= 0");
        if (!std::isfinite(beta) || !(beta > 0.0)) throw ConfigError("beta", "must be finite and > 0");
        if (!beta_per_date.empty()) {
            if (static_cast<int>(beta_per_date.size()) != n_dates)
                throw ConfigError("beta", "per-date widths must match the number of exercise dates");
            for (double b : beta_per_date)
                if (!std::isfinite(b) || !(b > 0.0)) throw ConfigError("beta", "must be finite and > 0");
        }
        if (!std::isfinite(beta_shrink) || !(beta_shrink > 0.0) || beta_shrink > 1.0)
            throw ConfigError("beta_shrink", "must lie in (0, 1]");
        for (int i = 2; i <= n_iterations; ++i)
            if (weight_uv_step(i, lambda, mu) < 0.0)
                throw ConfigError("lambda", "U/V damping factor is negative at iteration " + std::to_string(i));
    }
};

/// Weighted price sums. Price = sum w P / q, standard error
/// sqrt(Var * q2 / q^2) with Var the w-weighted payoff variance.
class PriceAccumulator {
public:
    void add(double weight, double payoff_sum, double payoff_sq_sum, long long count) {
        weighted_sum_ += weight * payoff_sum;
        weighted_sq_sum_ += weight * payoff_sq_sum;
        mass_ += weight * static_cast<double>(count);
        sq_mass_ += weight * weight * static_cast<double>(count);
    }

    double mass() const noexcept { return mass_; }
    double squared_mass() const noexcept { return sq_mass_; }
    double price() const { return weighted_sum_ / mass_; }
    double variance() const {
        const double p = price();
        return std::max(0.0, weighted_sq_sum_ / mass_ - p * p);
    }
    double standard_error() const { return std::sqrt(variance() * sq_mass_ / (mass_ * mass_)); }

private:
    double weighted_sum_ = 0.0;
    double weighted_sq_sum_ = 0.0;
    double mass_ = 0.0;
    double sq_mass_ = 0.0;
};

/// Exercise boundary at date k: the highest root of (K - x) - C(x) on (0, K].
/// A coarse scan down from K (steps of K/200) brackets the root, bisection
/// refines it to 1e-6 K. No sign change means no boundary.
inline std::optional<double> solve_boundary(const CoefficientSet& coeffs, const BasisSpec& spec,
                                            const PutPayoff& payoff, int k) {
    const int b = spec.block_of_date(k);
    if (!coeffs.has(b)) return std::nullopt;
    const double strike = payoff.strike();
    const auto g = [&](double x) { return (strike - x) - continuation_at_date(coeffs, spec, k, x); };
    double hi = strike;
    if (g(hi) == 0.0) return hi;
    if (!(g(hi) < 0.0)) return std::nullopt;

    constexpr int scan_steps = 200;
    double lo = hi;
    bool bracketed = false;
    for (int s = scan_steps - 1; s >= 0; --s) {
        lo = strike * s / scan_steps;
        if (g(lo) > 0.0) {
            bracketed = true;
            break;
        }
        hi = lo;
    }
    if (!bracketed) return std::nullopt;
    while (hi - lo > 1e-6 * strike) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Boundary estimates for dates 1..M (index k-1).
inline std::vector<std::optional<double>> solve_boundaries(const CoefficientSet& coeffs, const BasisSpec& spec,
                                                           const PutPayoff& payoff) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(spec.n_dates()));
    for (int k = 1; k <= spec.n_dates(); ++k) out[static_cast<std::size_t>(k - 1)] = solve_boundary(coeffs, spec, payoff, k);
    return out;
}

/// Discount factors e^{-r (t_{k+1} - t_k)} at index k-1, for k = 1..M-1.
inline std::vector<double> step_discounts(const ExerciseSchedule& schedule, double rate) {
    std::vector<double> d(static_cast<std::size_t>(schedule.size() - 1));
    for (int k = 1; k < schedule.size(); ++k)
        d[static_cast<std::size_t>(k - 1)] = discount(rate, schedule.time(k), schedule.time(k + 1));
    return d;
}

/// Backward pass over one path under a fixed policy. Exercise at k < M iff the
/// state is in the money, the date's block has coefficients and F_k >= C_k.
/// Writes P~_{k+1} to discounted_next[k-1] (k < M) and, when non-empty, the
/// exercise index kappa_k to kappa[k-1]. Returns P_1, valued at t_1.
template <Payoff P>
double value_path(std::span<const double> path, const CoefficientSet& coeffs, const BasisSpec& spec,
                  const P& payoff, std::span<const double> step_discount, std::span<double> discounted_next,
                  std::span<int> kappa = {}) {
    const int m = static_cast<int>(path.size());
    double value = payoff.exercise_value(path[static_cast<std::size_t>(m - 1)]);
    int exercise_at = m;
    if (!kappa.empty()) kappa[static_cast<std::size_t>(m - 1)] = m;
    for (int k = m - 1; k >= 1; --k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        value *= step_discount[idx];
        discounted_next[idx] = value;
        const double s = path[idx];
        if (payoff.in_the_money(s) && coeffs.has(spec.block_of_date(k))) {
            const double f = payoff.exercise_value(s);
            if (f >= continuation_at_date(coeffs, spec, k, s)) {
                value = f;
                exercise_at = k;
            }
        }
        if (!kappa.empty()) kappa[idx] = exercise_at;
    }
    return value;
}

struct PathValuation {
    double p1 = 0.0;                    // at t_1
    std::vector<double> discounted_next;  // P~_{k+1} at index k-1, k = 1..M-1
    std::vector<int> kappa;               // first exercise index >= k at index k-1
};

template <Payoff P>
PathValuation decide_and_value_path(const PathGrid& path, const CoefficientSet& coeffs, const BasisSpec& spec,
                                    const P& payoff, const ExerciseSchedule& schedule, double rate) {
    const auto m = static_cast<std::size_t>(schedule.size());
    if (path.values.size() != m) throw std::invalid_argument("path length does not match the schedule");
    PathValuation out;
    out.discounted_next.assign(m - 1, 0.0);
    out.kappa.assign(m, 0);
    const auto d = step_discounts(schedule, rate);
    out.p1 = value_path(std::span<const double>(path.values), coeffs, spec, payoff, d,
                        std::span<double>(out.discounted_next), std::span<int>(out.kappa));
    return out;
}

/// Everything the iterations share; immutable during a run.
struct ParallelSetup {
    MarketParams params;
    ExerciseSchedule schedule = ExerciseSchedule::uniform(1.0, 50);
    BasisSpec basis = BasisSpec(schedule, 10, BasisKind::time_quadratic);
    IterationPlan plan;
    WeightScheme weights = WeightScheme::defaults_for_strike(40.0);
    std::uint64_t seed = 42;
    int workers = 1;
    double ridge = kDefaultRidge;

    void validate() const {
        params.validate();
        schedule.check_consistent(params);
        plan.validate();
        if (workers < 1) throw ConfigError("workers", "must be >= 1");
        if (basis.n_dates() != schedule.size()) throw ConfigError("group_size", "basis does not match schedule");
        weights.validate(plan.n_iterations, schedule.size());
    }
};

/// Contribution of one iteration: u, v and price sums over its paths.
struct IterationOutput {
    NormalEquations u;
    double payoff_sum = 0.0;     // sum of P_1 discounted to t_0
    double payoff_sq_sum = 0.0;
    long long n_paths = 0;
};

/// Paths are reduced in fixed chunks merged in chunk order, so the output does
/// not depend on how chunks are spread over workers.
inline constexpr long long kReductionChunk = 256;

/// Values paths (i-1)m .. im-1 under `policy` and returns their aggregates.
/// `boundary` (index k-1) switches the regression weight at date k from the
/// in-the-money indicator to the Gaussian boundary weight; pass an empty
/// vector for indicator weights everywhere.
template <Payoff P>
IterationOutput run_iteration(int i, const ParallelSetup& setup, const CoefficientSet& policy,
                              const std::vector<std::optional<double>>& boundary, const P& payoff) {
    if (i < 1) throw std::invalid_argument("iteration index starts at 1");
    const int m = setup.schedule.size();
    const long long count = setup.plan.paths_per_iteration;
    const long long first = static_cast<long long>(i - 1) * count;
    const long long n_chunks = (count + kReductionChunk - 1) / kReductionChunk;
    const PathSimulator sim(setup.params, setup.schedule);
    const auto disc = step_discounts(setup.schedule, setup.params.rate);
    const double d0 = discount(setup.params.rate, 0.0, setup.schedule.time(1));
    const BasisSpec& spec = setup.basis;

    std::vector<double> beta(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k) beta[static_cast<std::size_t>(k - 1)] = setup.weights.beta_at(k, i);

    std::vector<IterationOutput> partial(static_cast<std::size_t>(n_chunks));
    run_workers(split_range(n_chunks, setup.workers), [&](int, IndexRange chunks) {
        std::vector<double> path(static_cast<std::size_t>(m));
        std::vector<double> next(static_cast<std::size_t>(std::max(1, m - 1)));
        for (long long c = chunks.begin; c < chunks.end; ++c) {
            IterationOutput& out = partial[static_cast<std::size_t>(c)];
            out.u = NormalEquations(spec);
            const long long lo = first + c * kReductionChunk;
            const long long hi = first + std::min(count, (c + 1) * kReductionChunk);
            for (long long j = lo; j < hi; ++j) {
                sim.simulate(RngStream{setup.seed, static_cast<std::uint64_t>(j)}, path);
                const double p1 = d0 * value_path(std::span<const double>(path), policy, spec, payoff, disc,
                                                  std::span<double>(next));
                out.payoff_sum += p1;
                out.payoff_sq_sum += p1 * p1;
                for (int k = 1; k < m; ++k) {
                    const auto idx = static_cast<std::size_t>(k - 1);
                    const double s = path[idx];
                    double w;
                    if (!boundary.empty() && boundary[idx])
                        w = boundary_weight(s, *boundary[idx], beta[idx]);
                    else
                        w = payoff.in_the_money(s) ? 1.0 : 0.0;
                    if (w > 0.0) out.u.accumulate(spec.block_of_date(k), w, basis_values(spec.kind(), s, spec.time(k)), next[idx]);
                }
            }
            out.n_paths = hi - lo;
        }
    });

    IterationOutput total;
    total.u = NormalEquations(spec);
    for (const auto& p : partial) {
        total.u += p.u;
        total.payoff_sum += p.payoff_sum;
        total.payoff_sq_sum += p.payoff_sq_sum;
        total.n_paths += p.n_paths;
    }
    return total;
}

struct ParallelRun {
    PricingResult result;
    CoefficientSet coefficients;  // after the last iteration
};

/// Runs all iterations. `warm_start` replaces the European bootstrap policy
/// (hold to maturity) for the first iteration.
template <Payoff P>
ParallelRun price_parallel(const ParallelSetup& setup, const P& payoff,
                           const std::optional<CoefficientSet>& warm_start = std::nullopt) {
    setup.validate();
    const BasisSpec& spec = setup.basis;
    const int m = setup.schedule.size();
    const int mid_date = std::max(1, (m + 1) / 2);
    const PutPayoff* put = nullptr;
    if constexpr (std::is_same_v<P, PutPayoff>) put = &payoff;

    CoefficientSet policy = CoefficientSet::bootstrap(spec);
    if (warm_start) {
        if (warm_start->fingerprint != spec.fingerprint() ||
            static_cast<int>(warm_start->alpha.size()) != spec.n_blocks())
            throw ConfigError("warm_start", "coefficients do not match the basis layout");
        policy = *warm_start;
    }

    Stopwatch total;
    double ms_paths = 0.0;
    double ms_regression = 0.0;
    double ms_boundary = 0.0;

    NormalEquations running(spec);
    PriceAccumulator price;
    std::vector<std::optional<double>> boundary;  // empty: indicator weights
    ParallelRun run;
    run.result.trace.reserve(static_cast<std::size_t>(setup.plan.n_iterations));

    for (int i = 1; i <= setup.plan.n_iterations; ++i) {
        Stopwatch it;
        Stopwatch phase;
        IterationOutput out = run_iteration(i, setup, policy, boundary, payoff);
        ms_paths += phase.ms();

        phase.restart();
        if (i >= 2) running.scale(weight_uv_step(i, setup.weights.lambda, setup.weights.mu));
        running += out.u;
        const double wp = weight_price(i, setup.weights.nu);
        price.add(wp, out.payoff_sum, out.payoff_sq_sum, out.n_paths);
        policy = solve_coefficients(running, spec, setup.ridge);
        ms_regression += phase.ms();

        phase.restart();
        std::optional<double> mid;
        if (put) {
            auto next_boundary = solve_boundaries(policy, spec, *put);
            mid = next_boundary[static_cast<std::size_t>(mid_date - 1)];
            if (setup.weights.boundary_weights) boundary = std::move(next_boundary);
        }
        ms_boundary += phase.ms();

        run.result.trace.push_back({i, price.price(), price.standard_error(), mid, it.ms()});
    }

    if (m > 1) {
        bool any = false;
        for (int b = 0; b < running.n_blocks(); ++b) any = any || running.block(b).mass > 0.0;
        if (!any) throw DegenerateRegression(0, "every block (no regression data)");
    }

    run.result.engine = "parallel";
    run.result.price = price.price();
    run.result.set_standard_error(price.standard_error());
    run.result.n_paths = setup.plan.total_paths();
    run.result.wall_ms = {{"paths", ms_paths},
                          {"regression", ms_regression},
                          {"boundary", ms_boundary},
                          {"total", total.ms()}};
    if (put) {
        const auto b = solve_boundaries(policy, spec, *put);
        for (int k = 1; k < m; ++k)
            run.result.boundary.push_back({setup.schedule.time(k), b[static_cast<std::size_t>(k - 1)]});
    }
    run.coefficients = std::move(policy);
    return run;
}

inline ParallelRun price_parallel(const ParallelSetup& setup,
                                  const std::optional<CoefficientSet>& warm_start = std::nullopt) {
    return price_parallel(setup, PutPayoff(setup.params.strike), warm_start);
}

}  // namespace amc
