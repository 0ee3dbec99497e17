#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace amc {

/// One row of the per-iteration diagnostics stream.
struct IterationRecord {
    int iteration = 0;
    double running_price = 0.0;
    double running_se = 0.0;
    std::optional<double> mid_boundary;
    double wall_ms = 0.0;

    bool operator==(const IterationRecord&) const = default;
};

struct BoundaryPoint {
    double time = 0.0;
    std::optional<double> boundary;

    bool operator==(const BoundaryPoint&) const = default;
};

struct PricingResult {
    std::string engine;
    double price = 0.0;
    double standard_error = 0.0;
    double ci95_halfwidth = 0.0;
    long long n_paths = 0;
    std::vector<std::pair<std::string, double>> wall_ms;  // phase -> milliseconds
    std::vector<IterationRecord> trace;
    std::vector<BoundaryPoint> boundary;
    std::vector<std::pair<std::string, std::string>> config;

    void set_standard_error(double se) {
        standard_error = se;
        ci95_halfwidth = 1.96 * se;
    }

    double phase_ms(const std::string& phase) const {
        for (const auto& [k, v] : wall_ms)
            if (k == phase) return v;
        return 0.0;
    }

    bool operator==(const PricingResult&) const = default;
};

// Machine formats print 17 significant digits; text tables use 3 decimals.

inline std::string format_g17(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_g17(*x) : ""; }

/// "4.467" for prices, ".009" for standard errors and signed differences
/// ("-.005"), matching the layout of the published comparison table.
inline std::string format_price(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

inline std::string format_small(double x) {
    std::string s = format_price(x);
    if (s.rfind("0.", 0) == 0) return s.substr(1);
    if (s.rfind("-0.", 0) == 0) return "-" + s.substr(2);
    return s;
}

namespace detail {

inline nlohmann::json optional_to_json(const std::optional<double>& x) {
    return x ? nlohmann::json(*x) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PricingResult& r) {
    nlohmann::ordered_json j;
    j["engine"] = r.engine;
    j["price"] = r.price;
    j["standard_error"] = r.standard_error;
    j["ci95_halfwidth"] = r.ci95_halfwidth;
    j["n_paths"] = r.n_paths;
    auto phases = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.wall_ms) phases[k] = v;
    j["wall_ms"] = phases;
    auto trace = nlohmann::ordered_json::array();
    for (const auto& t : r.trace) {
        trace.push_back({{"iteration", t.iteration},
                         {"running_price", t.running_price},
                         {"running_se", t.running_se},
                         {"mid_boundary", detail::optional_to_json(t.mid_boundary)},
                         {"wall_ms", t.wall_ms}});
    }
    j["trace"] = trace;
    auto boundary = nlohmann::ordered_json::array();
    for (const auto& b : r.boundary)
        boundary.push_back({{"time", b.time}, {"boundary", detail::optional_to_json(b.boundary)}});
    j["boundary"] = boundary;
    auto config = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.config) config[k] = v;
    j["config"] = config;
    return j;
}

inline PricingResult result_from_json(const nlohmann::ordered_json& j) {
    PricingResult r;
    r.engine = j.at("engine").get<std::string>();
    r.price = j.at("price").get<double>();
    r.standard_error = j.at("standard_error").get<double>();
    r.ci95_halfwidth = j.at("ci95_halfwidth").get<double>();
    r.n_paths = j.at("n_paths").get<long long>();
    for (const auto& [k, v] : j.at("wall_ms").items()) r.wall_ms.emplace_back(k, v.get<double>());
    for (const auto& t : j.at("trace")) {
        r.trace.push_back({t.at("iteration").get<int>(), t.at("running_price").get<double>(),
                           t.at("running_se").get<double>(), detail::optional_from_json(t.at("mid_boundary")),
                           t.at("wall_ms").get<double>()});
    }
    for (const auto& b : j.at("boundary"))
        r.boundary.push_back({b.at("time").get<double>(), detail::optional_from_json(b.at("boundary"))});
    for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
    return r;
}

inline constexpr const char* kResultCsvHeader = "engine,price,standard_error,ci95_halfwidth,n_paths,total_wall_ms";
inline constexpr const char* kTraceCsvHeader = "iteration,running_price,running_se,mid_boundary,wall_ms";
inline constexpr const char* kBoundaryCsvHeader = "time,boundary";

inline void write_trace_csv(std::ostream& os, const PricingResult& r) {
    os << kTraceCsvHeader << '\n';
    for (const auto& t : r.trace)
        os << t.iteration << ',' << format_g17(t.running_price) << ',' << format_g17(t.running_se) << ','
           << format_optional(t.mid_boundary) << ',' << format_g17(t.wall_ms) << '\n';
}

inline void write_boundary_csv(std::ostream& os, const std::vector<BoundaryPoint>& pts) {
    os << kBoundaryCsvHeader << '\n';
    for (const auto& b : pts) os << format_g17(b.time) << ',' << format_optional(b.boundary) << '\n';
}

enum class OutputFormat { json, csv, text };

inline std::string emit_result(const PricingResult& r, OutputFormat format) {
    std::ostringstream os;
    switch (format) {
        case OutputFormat::json:
            os << to_json(r).dump(2) << '\n';
            break;
        case OutputFormat::csv:
            os << kResultCsvHeader << '\n'
               << r.engine << ',' << format_g17(r.price) << ',' << format_g17(r.standard_error) << ','
               << format_g17(r.ci95_halfwidth) << ',' << r.n_paths << ',' << format_g17(r.phase_ms("total"))
               << '\n';
            break;
        case OutputFormat::text:
            os << r.engine << ": " << format_price(r.price) << " (" << format_small(r.standard_error) << ")"
               << "  95% CI +/- " << format_price(r.ci95_halfwidth) << "  paths=" << r.n_paths
               << "  time=" << format_price(r.phase_ms("total")) << " ms\n";
            break;
    }
    return os.str();
}

}  // namespace amc
