#pragma once

// Convergence studies over paths, iterations or workers, and log-log rate fits.

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amc/parallel.hpp"
#include "amc/result.hpp"

namespace amc {

enum class StudyAxis { paths, iterations, workers };

inline const char* to_string(StudyAxis a) noexcept {
    switch (a) {
        case StudyAxis::paths: return "paths";
        case StudyAxis::iterations: return "iterations";
        case StudyAxis::workers: return "workers";
    }
    return "?";
}

struct StudyRow {
    double axis_value = 0.0;
    int repeat = 0;
    double price = 0.0;
    double se_internal = 0.0;
    double wall_ms = 0.0;

    bool operator==(const StudyRow&) const = default;
};

struct ConvergenceStudy {
    StudyAxis axis = StudyAxis::paths;
    std::vector<double> points;
    int repeats = 5;
    std::vector<StudyRow> rows;                      // point-major, then repeat
    std::vector<std::vector<IterationRecord>> traces;  // parallel to rows

    void validate() const {
        if (points.size() < 3) throw std::invalid_argument("a convergence study needs at least 3 points");
        if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
        for (double p : points)
            if (!(p >= 1.0) || p != std::floor(p)) throw std::invalid_argument("study points must be positive integers");
    }

    /// Enough repeats for the empirical spread to mean something.
    bool supports_statistical_claims() const noexcept { return repeats >= 5 && points.size() >= 3; }
};

/// Fills `study.rows`: every point is priced `repeats` times with seeds
/// base.seed + repeat. Paths keep base.plan.n_iterations fixed; iterations
/// keep the total path count fixed.
inline ConvergenceStudy run_convergence_study(ConvergenceStudy study, const ParallelSetup& base) {
    study.validate();
    study.rows.clear();
    study.traces.clear();
    for (double point : study.points) {
        const auto value = static_cast<long long>(point);
        for (int r = 0; r < study.repeats; ++r) {
            ParallelSetup s = base;
            s.seed = base.seed + static_cast<std::uint64_t>(r);
            switch (study.axis) {
                case StudyAxis::paths: s.plan = IterationPlan::from_total(value, base.plan.n_iterations); break;
                case StudyAxis::iterations:
                    s.plan = IterationPlan::from_total(base.plan.total_paths(), static_cast<int>(value));
                    break;
                case StudyAxis::workers: s.workers = static_cast<int>(value); break;
            }
            auto run = price_parallel(s);
            study.rows.push_back({point, r, run.result.price, run.result.standard_error, run.result.phase_ms("total")});
            study.traces.push_back(std::move(run.result.trace));
        }
    }
    return study;
}

struct PointSummary {
    double axis_value = 0.0;
    int repeats = 0;
    double mean_price = 0.0;
    double empirical_sd = 0.0;  // spread of single-run prices
    double empirical_se = 0.0;  // empirical_sd / sqrt(repeats): uncertainty of mean_price
    double mean_se_internal = 0.0;
    double mean_wall_ms = 0.0;
};

inline std::vector<PointSummary> summarize(const ConvergenceStudy& study) {
    std::vector<PointSummary> out;
    for (double point : study.points) {
        PointSummary s{point};
        double sum = 0.0, sum_se = 0.0, sum_ms = 0.0;
        for (const auto& r : study.rows)
            if (r.axis_value == point) {
                ++s.repeats;
                sum += r.price;
                sum_se += r.se_internal;
                sum_ms += r.wall_ms;
            }
        if (s.repeats == 0) continue;
        s.mean_price = sum / s.repeats;
        s.mean_se_internal = sum_se / s.repeats;
        s.mean_wall_ms = sum_ms / s.repeats;
        double ss = 0.0;
        for (const auto& r : study.rows)
            if (r.axis_value == point) ss += (r.price - s.mean_price) * (r.price - s.mean_price);
        s.empirical_sd = s.repeats > 1 ? std::sqrt(ss / (s.repeats - 1)) : 0.0;
        s.empirical_se = s.empirical_sd / std::sqrt(static_cast<double>(s.repeats));
        out.push_back(s);
    }
    return out;
}

struct RateEstimate {
    double slope = 0.0;
    double slope_se = 0.0;
    int n_points = 0;
};

/// Least-squares slope of log(se) against log(x).
inline RateEstimate estimate_rate(const std::vector<double>& x, const std::vector<double>& se) {
    if (x.size() != se.size()) throw std::invalid_argument("x and se differ in length");
    if (x.size() < 3) throw std::invalid_argument("rate estimate needs at least 3 points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(x.size()), ly(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(se[i] > 0.0)) throw std::invalid_argument("rate estimate needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(se[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("rate estimate needs distinct x values");
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = ly[i] - my - slope * (lx[i] - mx);
        ssr += e * e;
    }
    return {slope, std::sqrt(ssr / (n - 2.0) / sxx), static_cast<int>(x.size())};
}

enum class SeSource { internal, empirical };

/// Slope of the per-point standard error against the axis value. The engine's
/// own estimator is the default; `empirical` uses the spread across repeats.
inline RateEstimate estimate_rate(const ConvergenceStudy& study, SeSource source = SeSource::internal) {
    std::vector<double> x, se;
    for (const auto& s : summarize(study)) {
        x.push_back(s.axis_value);
        se.push_back(source == SeSource::internal ? s.mean_se_internal : s.empirical_sd);
    }
    return estimate_rate(x, se);
}

inline constexpr const char* kStudyCsvHeader = "axis_value,repeat,price,se_internal,wall_ms";

inline void write_study_csv(std::ostream& os, const ConvergenceStudy& study) {
    os << kStudyCsvHeader << '\n';
    for (const auto& r : study.rows)
        os << format_g17(r.axis_value) << ',' << r.repeat << ',' << format_g17(r.price) << ','
           << format_g17(r.se_internal) << ',' << format_g17(r.wall_ms) << '\n';
}

/// Reads rows written by `write_study_csv`; points are recovered in order of
/// first appearance.
inline ConvergenceStudy read_study_csv(std::istream& is, StudyAxis axis) {
    ConvergenceStudy study;
    study.axis = axis;
    std::string line;
    if (!std::getline(is, line) || line != kStudyCsvHeader) throw std::runtime_error("unexpected study CSV header");
    int max_repeat = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw std::runtime_error("malformed study CSV row: " + line);
        StudyRow r{std::strtod(f[0].c_str(), nullptr), std::stoi(f[1]), std::strtod(f[2].c_str(), nullptr),
                   std::strtod(f[3].c_str(), nullptr), std::strtod(f[4].c_str(), nullptr)};
        if (study.points.empty() || study.points.back() != r.axis_value) {
            bool seen = false;
            for (double p : study.points) seen = seen || p == r.axis_value;
            if (!seen) study.points.push_back(r.axis_value);
        }
        max_repeat = std::max(max_repeat, r.repeat);
        study.rows.push_back(r);
    }
    study.repeats = max_repeat + 1;
    return study;
}

inline void write_study_traces_csv(std::ostream& os, const ConvergenceStudy& study) {
    os << "axis_value,repeat,iteration,running_price,running_se,mid_boundary\n";
    for (std::size_t i = 0; i < study.rows.size() && i < study.traces.size(); ++i)
        for (const auto& t : study.traces[i])
            os << format_g17(study.rows[i].axis_value) << ',' << study.rows[i].repeat << ',' << t.iteration << ','
               << format_g17(t.running_price) << ',' << format_g17(t.running_se) << ','
               << format_optional(t.mid_boundary) << '\n';
}

}  // namespace amc
