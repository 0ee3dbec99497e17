#pragma once

// Longstaff-Schwartz baseline: simulate and store every path, then run the
// backward regression recursion on a single thread.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "amc/errors.hpp"
#include "amc/market.hpp"
#include "amc/product.hpp"
#include "amc/regression.hpp"
#include "amc/result.hpp"
#include "amc/workers.hpp"

namespace amc {

struct LsmConfig {
    long long n_paths = 100'000;
    std::uint64_t seed = 42;
    bool parallel_paths = false;  // parallel path generation only; the recursion stays serial
    int workers = 1;
    double ridge = kDefaultRidge;
};

struct LsmRun {
    PricingResult result;
    CoefficientSet coefficients;  // one block per date; the last date has none
};

template <Payoff P>
LsmRun price_lsm(const MarketParams& params, const ExerciseSchedule& schedule, const LsmConfig& config,
                 const P& payoff) {
    const BasisSpec basis = BasisSpec::per_date(schedule);
    const int m = schedule.size();
    const long long n = config.n_paths;
    if (n < basis.dim()) throw std::invalid_argument("n_paths must be at least the basis dimension");

    Stopwatch total;
    Stopwatch phase;
    const PathSimulator sim(params, schedule);
    std::vector<double> paths(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    const auto generate = [&](int, IndexRange r) {
        for (long long j = r.begin; j < r.end; ++j) {
            const RngStream stream{config.seed, static_cast<std::uint64_t>(j)};
            sim.simulate(stream, std::span<double>(paths.data() + j * m, static_cast<std::size_t>(m)));
        }
    };
    run_workers(split_range(n, config.parallel_paths ? config.workers : 1), generate);
    const double ms_paths = phase.ms();
    phase.restart();

    const auto x = [&](long long j, int k) { return paths[static_cast<std::size_t>(j * m + (k - 1))]; };

    std::vector<double> value(static_cast<std::size_t>(n));
    for (long long j = 0; j < n; ++j) value[static_cast<std::size_t>(j)] = payoff.exercise_value(x(j, m));

    CoefficientSet coeffs = CoefficientSet::bootstrap(basis);
    NormalEquations ne(basis);
    for (int k = m - 1; k >= 1; --k) {
        const double d = discount(params.rate, schedule.time(k), schedule.time(k + 1));
        const int b = k - 1;
        ne.set_zero();
        for (long long j = 0; j < n; ++j) {
            auto& v = value[static_cast<std::size_t>(j)];
            v *= d;
            const double s = x(j, k);
            if (payoff.in_the_money(s)) ne.accumulate(b, 1.0, basis_values(BasisKind::quadratic, s, 0.0), v);
        }
        if (ne.block(b).mass == 0.0) continue;
        try {
            coeffs.alpha[static_cast<std::size_t>(b)] = solve_block(ne.block(b), b, config.ridge);
        } catch (const DegenerateRegression&) {
            throw DegenerateRegression(k, "date");
        }
        for (long long j = 0; j < n; ++j) {
            const double s = x(j, k);
            if (!payoff.in_the_money(s)) continue;
            const double f = payoff.exercise_value(s);
            if (f >= continuation_at_date(coeffs, basis, k, s)) value[static_cast<std::size_t>(j)] = f;
        }
    }

    const double d0 = discount(params.rate, 0.0, schedule.time(1));
    double sum = 0.0;
    for (double v : value) sum += d0 * v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : value) ss += (d0 * v - mean) * (d0 * v - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

    LsmRun run;
    run.result.engine = "lsm";
    run.result.price = mean;
    run.result.set_standard_error(sd / std::sqrt(static_cast<double>(n)));
    run.result.n_paths = n;
    run.result.wall_ms = {{"paths", ms_paths}, {"regression", phase.ms()}, {"total", total.ms()}};
    run.coefficients = std::move(coeffs);
    return run;
}

inline LsmRun price_lsm(const MarketParams& params, const ExerciseSchedule& schedule, const LsmConfig& config) {
    return price_lsm(params, schedule, config, PutPayoff(params.strike));
}

}  // namespace amc
