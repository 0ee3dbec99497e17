#pragma once

// Comparison grid of American put prices: finite differences, LSM, the
// parallel engine and the European closed form over spot x vol x maturity.

#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amc/config.hpp"
#include "amc/lsm.hpp"
#include "amc/oracle.hpp"
#include "amc/parallel.hpp"
#include "amc/result.hpp"

namespace amc {

struct TableCell {
    double spot = 0.0;
    double vol = 0.0;
    double maturity = 0.0;
    std::optional<double> fd;
    std::optional<double> lsm;
    std::optional<double> lsm_se;
    std::optional<double> parallel;
    std::optional<double> parallel_se;
    std::optional<double> european;
    std::string error;  // empty when every engine succeeded

    static std::optional<double> diff(const std::optional<double>& a, const std::optional<double>& b) {
        if (a && b) return *a - *b;
        return std::nullopt;
    }

    std::optional<double> premium_fd() const { return diff(fd, european); }
    std::optional<double> premium_lsm() const { return diff(lsm, european); }
    std::optional<double> premium_parallel() const { return diff(parallel, european); }
    std::optional<double> fd_minus_lsm() const { return diff(fd, lsm); }
    std::optional<double> fd_minus_parallel() const { return diff(fd, parallel); }
    std::optional<double> lsm_minus_parallel() const { return diff(lsm, parallel); }
};

struct TableGrid {
    std::vector<double> spots{36, 38, 40, 42, 44};
    std::vector<double> vols{0.2, 0.4};
    std::vector<double> maturities{1, 2};
};

/// Prices every cell with `base` for everything except spot, vol and
/// maturity. Cell i (row-major) uses seed base.seed + i, so cells do not
/// share paths and their errors are independent. A failing engine leaves its
/// column empty, records the message and the remaining cells still run.
inline std::vector<TableCell> run_table(const RunConfig& base, const TableGrid& grid = {}) {
    std::vector<TableCell> cells;
    for (double s : grid.spots)
        for (double v : grid.vols)
            for (double t : grid.maturities) {
                RunConfig cfg = base;
                cfg.seed = base.seed + cells.size();
                cfg.market.spot = s;
                cfg.market.vol = v;
                cfg.market.maturity = t;
                TableCell c;
                c.spot = s;
                c.vol = v;
                c.maturity = t;
                const auto attempt = [&](const char* engine, auto&& fn) {
                    try {
                        fn();
                    } catch (const std::exception& e) {
                        if (!c.error.empty()) c.error += "; ";
                        c.error += std::string(engine) + ": " + e.what();
                    }
                };
                attempt("european", [&] { c.european = european_put_closed_form(cfg.market); });
                attempt("fd", [&] { c.fd = american_put_fd(cfg.market, cfg.fd_grid(), cfg.fd_constraint()).price; });
                attempt("lsm", [&] {
                    const auto r = price_lsm(cfg.market, cfg.schedule(), cfg.lsm_config()).result;
                    c.lsm = r.price;
                    c.lsm_se = r.standard_error;
                });
                attempt("parallel", [&] {
                    const auto r = price_parallel(cfg.parallel_setup()).result;
                    c.parallel = r.price;
                    c.parallel_se = r.standard_error;
                });
                cells.push_back(std::move(c));
            }
    return cells;
}

inline constexpr const char* kTableCsvHeader =
    "spot,vol,maturity,fd,lsm,lsm_se,parallel,parallel_se,european,premium_fd,premium_lsm,premium_parallel,"
    "fd_minus_lsm,fd_minus_parallel,lsm_minus_parallel,error";

inline void write_table_csv(std::ostream& os, const std::vector<TableCell>& cells) {
    os << kTableCsvHeader << '\n';
    for (const auto& c : cells) {
        std::string err = c.error;
        for (auto& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        os << format_g17(c.spot) << ',' << format_g17(c.vol) << ',' << format_g17(c.maturity) << ','
           << format_optional(c.fd) << ',' << format_optional(c.lsm) << ',' << format_optional(c.lsm_se) << ','
           << format_optional(c.parallel) << ',' << format_optional(c.parallel_se) << ','
           << format_optional(c.european) << ',' << format_optional(c.premium_fd()) << ','
           << format_optional(c.premium_lsm()) << ',' << format_optional(c.premium_parallel()) << ','
           << format_optional(c.fd_minus_lsm()) << ',' << format_optional(c.fd_minus_parallel()) << ','
           << format_optional(c.lsm_minus_parallel()) << ',' << err << '\n';
    }
}

namespace detail {

inline std::string table_price(const std::optional<double>& x) { return x ? format_price(*x) : "-"; }
inline std::string table_small(const std::optional<double>& x) { return x ? format_small(*x) : "-"; }
inline std::string table_se(const std::optional<double>& x) { return x ? "(" + format_small(*x) + ")" : ""; }

}  // namespace detail

/// Fixed-width text table: prices to 3 decimals, s.e. as "(.009)".
inline void write_table_text(std::ostream& os, const std::vector<TableCell>& cells) {
    char line[512];
    std::snprintf(line, sizeof line, "%4s %5s %3s %8s %8s %7s %8s %7s %8s %7s %7s %7s %7s %7s %7s\n", "S", "vol", "T",
                  "FD", "LSM", "(s.e.)", "Par", "(s.e.)", "Euro", "EE-FD", "EE-LSM", "EE-Par", "FD-LSM", "FD-Par",
                  "LSM-Par");
    os << line;
    for (const auto& c : cells) {
        using namespace detail;
        std::snprintf(line, sizeof line, "%4.0f %5.1f %3.0f %8s %8s %7s %8s %7s %8s %7s %7s %7s %7s %7s %7s\n", c.spot,
                      c.vol, c.maturity, table_price(c.fd).c_str(), table_price(c.lsm).c_str(),
                      table_se(c.lsm_se).c_str(), table_price(c.parallel).c_str(), table_se(c.parallel_se).c_str(),
                      table_price(c.european).c_str(), table_small(c.premium_fd()).c_str(),
                      table_small(c.premium_lsm()).c_str(), table_small(c.premium_parallel()).c_str(),
                      table_small(c.fd_minus_lsm()).c_str(), table_small(c.fd_minus_parallel()).c_str(),
                      table_small(c.lsm_minus_parallel()).c_str());
        os << line;
        if (!c.error.empty()) os << "     error: " << c.error << '\n';
    }
}

}  // namespace amc
