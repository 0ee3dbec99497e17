#pragma once

// Black-Scholes market, exercise schedule and counter-based path simulation.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

namespace amc {

struct MarketParams {
    double spot = 36.0;
    double rate = 0.06;
    double vol = 0.2;
    double strike = 40.0;
    double maturity = 1.0;

    void validate() const {
        if (!(spot > 0.0)) throw std::invalid_argument("spot must be > 0");
        if (!(vol >= 0.0)) throw std::invalid_argument("vol must be >= 0");
        if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be > 0");
        if (!(strike > 0.0)) throw std::invalid_argument("strike must be > 0");
        if (!std::isfinite(rate)) throw std::invalid_argument("rate must be finite");
    }
};

/// Exercise dates t_1 < ... < t_M = T. t_0 = 0 is the valuation date and not
/// an exercise date.
class ExerciseSchedule {
public:
    explicit ExerciseSchedule(std::vector<double> dates) : dates_(std::move(dates)) {
        if (dates_.empty()) throw std::invalid_argument("schedule needs at least one date");
        if (!(dates_.front() > 0.0)) throw std::invalid_argument("first exercise date must be > 0");
        for (std::size_t k = 1; k < dates_.size(); ++k)
            if (!(dates_[k] > dates_[k - 1]))
                throw std::invalid_argument("exercise dates must be strictly increasing");
    }

    /// t_k = k * T / M for k = 1..M.
    static ExerciseSchedule uniform(double maturity, int count) {
        if (count < 1) throw std::invalid_argument("schedule needs at least one date");
        std::vector<double> d(static_cast<std::size_t>(count));
        for (int k = 1; k <= count; ++k)
            d[static_cast<std::size_t>(k - 1)] = maturity * k / count;
        d.back() = maturity;
        return ExerciseSchedule(std::move(d));
    }

    /// `per_year` dates per year, rounded to the nearest whole count.
    static ExerciseSchedule per_year(double maturity, int per_year) {
        return uniform(maturity, std::max(1, static_cast<int>(std::lround(per_year * maturity))));
    }

    int size() const noexcept { return static_cast<int>(dates_.size()); }
    /// 1-based access matching the t_1..t_M convention.
    double time(int k) const { return dates_.at(static_cast<std::size_t>(k - 1)); }
    double maturity() const noexcept { return dates_.back(); }
    std::span<const double> dates() const noexcept { return dates_; }

    void check_consistent(const MarketParams& p) const {
        if (std::abs(maturity() - p.maturity) > 1e-12 * std::max(1.0, p.maturity))
            throw std::invalid_argument("last exercise date must equal the maturity");
    }

private:
    std::vector<double> dates_;
};

inline double discount(double rate, double t1, double t2) { return std::exp(-rate * (t2 - t1)); }

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Uniform in the open interval (0, 1) from the top 52 bits; the half-step
/// offset keeps both ends exactly representable.
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double normal_quantile(double u) {
    return -1.4142135623730950488 * boost::math::erfc_inv(2.0 * u);
}

/// Random stream of one path. The variate for (path, step) is a pure function
/// of (master_seed, path_index, step), so any partition of paths over workers
/// reproduces the same numbers.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;

    std::uint64_t bits(std::uint64_t step) const noexcept {
        std::uint64_t h = detail::splitmix64(master_seed);
        h = detail::splitmix64(h ^ path_index);
        return detail::splitmix64(h ^ (step * 0xd1342543de82ef95ULL));
    }

    double uniform(std::uint64_t step) const noexcept { return to_open_unit(bits(step)); }
    double normal(std::uint64_t step) const { return normal_quantile(uniform(step)); }
};

/// Per-step drift and diffusion of the exact lognormal transition.
class PathSimulator {
public:
    PathSimulator(const MarketParams& params, const ExerciseSchedule& schedule)
        : spot_(params.spot) {
        params.validate();
        schedule.check_consistent(params);
        const int m = schedule.size();
        drift_.resize(static_cast<std::size_t>(m));
        diffusion_.resize(static_cast<std::size_t>(m));
        double prev = 0.0;
        for (int k = 1; k <= m; ++k) {
            const double dt = schedule.time(k) - prev;
            drift_[static_cast<std::size_t>(k - 1)] = (params.rate - 0.5 * params.vol * params.vol) * dt;
            diffusion_[static_cast<std::size_t>(k - 1)] = params.vol * std::sqrt(dt);
            prev = schedule.time(k);
        }
    }

    int steps() const noexcept { return static_cast<int>(drift_.size()); }

    /// Writes X_1..X_M into `out` (size M). Works in log space so that the
    /// zero-volatility path is exp(log S + r t_k) up to one rounding.
    void simulate(const RngStream& stream, std::span<double> out) const {
        if (out.size() != drift_.size()) throw std::invalid_argument("path buffer has wrong length");
        double log_s = std::log(spot_);
        for (std::size_t k = 0; k < drift_.size(); ++k) {
            log_s += drift_[k];
            if (diffusion_[k] != 0.0) log_s += diffusion_[k] * stream.normal(k);
            out[k] = std::exp(log_s);
        }
    }

private:
    double spot_;
    std::vector<double> drift_;
    std::vector<double> diffusion_;
};

struct PathGrid {
    std::uint64_t path_index = 0;
    std::vector<double> values;  // X_1..X_M, values[k-1] = X_k
};

inline PathGrid simulate_path(const MarketParams& params, const ExerciseSchedule& schedule,
                              const RngStream& stream) {
    PathSimulator sim(params, schedule);
    PathGrid g{stream.path_index, std::vector<double>(static_cast<std::size_t>(schedule.size()))};
    sim.simulate(stream, g.values);
    return g;
}

}  // namespace amc
