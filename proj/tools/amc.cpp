// Command-line front end: amc <command> [--config file] [--key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amc/config.hpp"
#include "amc/diagnostics.hpp"
#include "amc/errors.hpp"
#include "amc/lsm.hpp"
#include "amc/oracle.hpp"
#include "amc/parallel.hpp"
#include "amc/result.hpp"
#include "amc/table.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os.exceptions(std::ios::failbit | std::ios::badbit);
    return os;
}

std::filesystem::path output_file(const amc::RunConfig& cfg, const char* name) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    return dir / name;
}

void write_result_files(const amc::RunConfig& cfg, const amc::PricingResult& r) {
    if (cfg.output_dir.empty()) return;
    open_output(output_file(cfg, "result.json")) << amc::to_json(r).dump(2) << '\n';
    if (!r.trace.empty()) {
        auto os = open_output(output_file(cfg, "trace.csv"));
        amc::write_trace_csv(os, r);
    }
    if (!r.boundary.empty()) {
        auto os = open_output(output_file(cfg, "boundary.csv"));
        amc::write_boundary_csv(os, r.boundary);
    }
}

void write_coefficients(const amc::RunConfig& cfg, const amc::CoefficientSet& c) {
    if (cfg.coefficients_out.empty()) return;
    open_output(cfg.coefficients_out) << amc::to_json(c).dump(2) << '\n';
}

std::optional<amc::CoefficientSet> load_warm_start(const amc::RunConfig& cfg) {
    if (cfg.bootstrap != "warm-start") return std::nullopt;
    std::ifstream is(cfg.warm_start_file);
    if (!is) throw IoError("cannot read " + cfg.warm_start_file);
    try {
        return amc::coefficients_from_json(nlohmann::json::parse(is), cfg.basis_spec());
    } catch (const std::exception& e) {
        throw amc::ConfigError("warm_start_file", e.what());
    }
}

void finish(const amc::RunConfig& cfg, amc::PricingResult r) {
    r.config = cfg.echo();
    std::cout << amc::emit_result(r, cfg.output_format());
    write_result_files(cfg, r);
}

void run_parallel(const amc::RunConfig& cfg) {
    auto run = amc::price_parallel(cfg.parallel_setup(), load_warm_start(cfg));
    write_coefficients(cfg, run.coefficients);
    finish(cfg, std::move(run.result));
}

void run_lsm(const amc::RunConfig& cfg) {
    auto run = amc::price_lsm(cfg.market, cfg.schedule(), cfg.lsm_config());
    write_coefficients(cfg, run.coefficients);
    finish(cfg, std::move(run.result));
}

void run_fd(const amc::RunConfig& cfg) {
    amc::Stopwatch sw;
    const auto fd = cfg.fd_exercise == "bermudan"
                        ? amc::american_put_fd_bermudan(cfg.market, cfg.fd_grid(), cfg.schedule(), cfg.fd_constraint())
                        : amc::american_put_fd(cfg.market, cfg.fd_grid(), cfg.fd_constraint());
    amc::PricingResult r;
    r.engine = "fd";
    r.price = fd.price;
    r.set_standard_error(0.0);
    r.boundary = fd.boundary;
    r.wall_ms = {{"total", sw.ms()}};
    finish(cfg, std::move(r));
}

void run_european(const amc::RunConfig& cfg) {
    amc::PricingResult r;
    r.engine = "european";
    r.price = amc::european_put_closed_form(cfg.market);
    r.set_standard_error(0.0);
    r.wall_ms = {{"total", 0.0}};
    finish(cfg, std::move(r));
}

void run_table_command(const amc::RunConfig& cfg) {
    const auto cells = amc::run_table(cfg);
    if (cfg.format == "csv")
        amc::write_table_csv(std::cout, cells);
    else
        amc::write_table_text(std::cout, cells);
    if (!cfg.output_dir.empty()) {
        auto os = open_output(output_file(cfg, "table.csv"));
        amc::write_table_csv(os, cells);
    }
}

void run_converge(const amc::RunConfig& cfg) {
    amc::ConvergenceStudy study;
    study.axis = cfg.study_axis();
    study.points = cfg.study_points();
    study.repeats = cfg.repeats;
    try {
        study.validate();
    } catch (const std::invalid_argument& e) {
        throw amc::ConfigError("points", e.what());
    }
    study = amc::run_convergence_study(std::move(study), cfg.parallel_setup());
    amc::write_study_csv(std::cout, study);
    std::cout << "\naxis_value,mean_price,empirical_sd,mean_se_internal,mean_wall_ms\n";
    for (const auto& s : amc::summarize(study))
        std::cout << amc::format_g17(s.axis_value) << ',' << amc::format_g17(s.mean_price) << ','
                  << amc::format_g17(s.empirical_sd) << ',' << amc::format_g17(s.mean_se_internal) << ','
                  << amc::format_g17(s.mean_wall_ms) << '\n';
    if (study.axis != amc::StudyAxis::workers) {
        const auto rate = amc::estimate_rate(study);
        std::cout << "\nslope " << amc::format_g17(rate.slope) << " +/- " << amc::format_g17(rate.slope_se) << '\n';
    }
    if (!study.supports_statistical_claims()) std::cout << "note: fewer than 5 repeats, spreads are indicative only\n";
    if (!cfg.output_dir.empty()) {
        auto os = open_output(output_file(cfg, "converge.csv"));
        amc::write_study_csv(os, study);
        auto ts = open_output(output_file(cfg, "trace.csv"));
        amc::write_study_traces_csv(ts, study);
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    for (const auto& a : args)
        if (a == "-h" || a == "--help") {
            amc::RunConfig cfg;
            CLI::App app{"American put pricing: parallel iterative LSM, LSM, finite differences"};
            amc::add_config_options(app, cfg);
            std::cout << app.help();
            return 0;
        }
    try {
        const auto cfg = amc::parse_config(args);
        if (!cfg.output_dir.empty()) output_file(cfg, "");
        if (cfg.command == "price-parallel") run_parallel(cfg);
        else if (cfg.command == "price-lsm") run_lsm(cfg);
        else if (cfg.command == "price-fd") run_fd(cfg);
        else if (cfg.command == "price-european") run_european(cfg);
        else if (cfg.command == "table") run_table_command(cfg);
        else run_converge(cfg);
    } catch (const amc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
