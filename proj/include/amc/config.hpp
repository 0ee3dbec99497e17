#pragma once

// Run configuration: flat key=value config file plus --key=value flags.
// Precedence, lowest first: built-in defaults, config file, AMC_SEED (seed
// only), command-line flags.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "amc/diagnostics.hpp"
#include "amc/errors.hpp"
#include "amc/lsm.hpp"
#include "amc/market.hpp"
#include "amc/oracle.hpp"
#include "amc/parallel.hpp"
#include "amc/regression.hpp"
#include "amc/result.hpp"

namespace amc {

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> c{"price-parallel", "price-lsm", "price-fd", "price-european", "table",
                                            "converge"};
    return c;
}

inline int default_workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct RunConfig {
    std::string command;

    MarketParams market;  // spot 36, rate 0.06, vol 0.2, strike 40, maturity 1
    int dates_per_year = 50;

    long long paths = 100'000;
    int iterations = 100;
    int group_size = 10;
    std::string basis = "auto";  // auto | quadratic | time-quadratic

    double lambda = 2.0;
    double mu = 2.0;
    double nu = 0.99;
    std::optional<double> beta;  // default 0.2 * strike
    double beta_shrink = 1.0;
    bool boundary_weights = true;

    std::uint64_t seed = 42;
    int workers = default_workers();
    std::string bootstrap = "european";  // european | warm-start
    std::string warm_start_file;
    double ridge = kDefaultRidge;
    bool lsm_parallel_paths = false;

    long fd_time_steps = 40'000;
    int fd_space_steps = 1'000;
    std::optional<double> fd_s_max;     // default 4 * strike
    std::string fd_method = "projection";  // projection | psor
    std::string fd_exercise = "american";  // american | bermudan

    std::string axis = "paths";  // paths | iterations | workers
    std::vector<double> points;  // empty: axis default
    int repeats = 5;

    std::string output_dir;    // empty: write nothing
    std::string format = "text";  // text | json | csv
    std::string coefficients_out;

    BasisKind basis_kind() const {
        if (basis == "quadratic") return BasisKind::quadratic;
        if (basis == "time-quadratic") return BasisKind::time_quadratic;
        return group_size == 1 ? BasisKind::quadratic : BasisKind::time_quadratic;
    }

    double beta_value() const { return beta.value_or(0.2 * market.strike); }

    std::vector<double> study_points() const {
        if (!points.empty()) return points;
        if (axis == "iterations") return {10, 20, 100, 200};
        if (axis == "workers") return {1, 2, 4};
        return {10'000, 40'000, 160'000};
    }

    ExerciseSchedule schedule() const { return ExerciseSchedule::per_year(market.maturity, dates_per_year); }

    BasisSpec basis_spec() const { return BasisSpec(schedule(), group_size, basis_kind()); }

    ParallelSetup parallel_setup() const {
        ParallelSetup s;
        s.params = market;
        s.schedule = schedule();
        s.basis = basis_spec();
        s.plan = IterationPlan::from_total(paths, iterations);
        s.weights.lambda = lambda;
        s.weights.mu = mu;
        s.weights.nu = nu;
        s.weights.beta = beta_value();
        s.weights.beta_shrink = beta_shrink;
        s.weights.boundary_weights = boundary_weights;
        s.seed = seed;
        s.workers = workers;
        s.ridge = ridge;
        return s;
    }

    LsmConfig lsm_config() const { return {paths, seed, lsm_parallel_paths, workers, ridge}; }

    FdGrid fd_grid() const { return {fd_time_steps, fd_space_steps, fd_s_max.value_or(4.0 * market.strike)}; }

    FdConstraint fd_constraint() const { return fd_method == "psor" ? FdConstraint::psor : FdConstraint::projection; }

    OutputFormat output_format() const {
        if (format == "json") return OutputFormat::json;
        if (format == "csv") return OutputFormat::csv;
        return OutputFormat::text;
    }

    StudyAxis study_axis() const {
        if (axis == "iterations") return StudyAxis::iterations;
        if (axis == "workers") return StudyAxis::workers;
        return StudyAxis::paths;
    }

    /// Throws ConfigError naming the first offending key.
    void validate() const {
        const auto& cmds = known_commands();
        if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
            throw ConfigError("command", "unknown command '" + command + "'");
        if (!(market.spot > 0.0)) throw ConfigError("spot", "must be > 0");
        if (!(market.strike > 0.0)) throw ConfigError("strike", "must be > 0");
        if (!(market.vol >= 0.0)) throw ConfigError("vol", "must be >= 0");
        if (!(market.maturity > 0.0)) throw ConfigError("maturity", "must be > 0");
        if (!std::isfinite(market.rate)) throw ConfigError("rate", "must be finite");
        if (dates_per_year < 1) throw ConfigError("dates_per_year", "must be >= 1");
        if (paths < 1) throw ConfigError("paths", "must be >= 1");
        if (iterations < 1) throw ConfigError("iterations", "must be >= 1");
        if (paths % iterations != 0) throw ConfigError("paths", "must be a multiple of iterations");
        if (group_size < 1) throw ConfigError("group_size", "must be >= 1");
        if (basis != "auto" && basis != "quadratic" && basis != "time-quadratic")
            throw ConfigError("basis", "must be auto, quadratic or time-quadratic");
        if (workers < 1) throw ConfigError("workers", "must be >= 1");
        if (bootstrap != "european" && bootstrap != "warm-start")
            throw ConfigError("bootstrap", "must be european or warm-start");
        if (bootstrap == "warm-start" && warm_start_file.empty())
            throw ConfigError("warm_start_file", "required when bootstrap=warm-start");
        if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("ridge", "must be finite and >= 0");
        if (fd_time_steps < 1) throw ConfigError("fd_time_steps", "must be >= 1");
        if (fd_space_steps < 3) throw ConfigError("fd_space_steps", "must be >= 3");
        if (fd_s_max && !(*fd_s_max > market.strike)) throw ConfigError("fd_s_max", "must exceed the strike");
        if (fd_method != "projection" && fd_method != "psor") throw ConfigError("fd_method", "must be projection or psor");
        if (fd_exercise != "american" && fd_exercise != "bermudan")
            throw ConfigError("fd_exercise", "must be american or bermudan");
        if (axis != "paths" && axis != "iterations" && axis != "workers")
            throw ConfigError("axis", "must be paths, iterations or workers");
        if (repeats < 1) throw ConfigError("repeats", "must be >= 1");
        if (command == "converge" && study_points().size() < 3) throw ConfigError("points", "need at least 3 points");
        if (format != "text" && format != "json" && format != "csv") throw ConfigError("format", "must be text, json or csv");
        if (beta && !(*beta > 0.0)) throw ConfigError("beta", "must be > 0");
        WeightScheme w;
        w.lambda = lambda;
        w.mu = mu;
        w.nu = nu;
        w.beta = beta_value();
        w.beta_shrink = beta_shrink;
        w.validate(iterations, schedule().size());
    }

    /// Every setting as resolved text, in a fixed order.
    std::vector<std::pair<std::string, std::string>> echo() const {
        std::vector<std::pair<std::string, std::string>> e;
        const auto num = [](double x) { return format_g17(x); };
        e.emplace_back("command", command);
        e.emplace_back("spot", num(market.spot));
        e.emplace_back("rate", num(market.rate));
        e.emplace_back("vol", num(market.vol));
        e.emplace_back("strike", num(market.strike));
        e.emplace_back("maturity", num(market.maturity));
        e.emplace_back("dates_per_year", std::to_string(dates_per_year));
        e.emplace_back("paths", std::to_string(paths));
        e.emplace_back("iterations", std::to_string(iterations));
        e.emplace_back("group_size", std::to_string(group_size));
        e.emplace_back("basis", to_string(basis_kind()));
        e.emplace_back("lambda", num(lambda));
        e.emplace_back("mu", num(mu));
        e.emplace_back("nu", num(nu));
        e.emplace_back("beta", num(beta_value()));
        e.emplace_back("beta_shrink", num(beta_shrink));
        e.emplace_back("boundary_weights", boundary_weights ? "true" : "false");
        e.emplace_back("seed", std::to_string(seed));
        e.emplace_back("workers", std::to_string(workers));
        e.emplace_back("bootstrap", bootstrap);
        e.emplace_back("warm_start_file", warm_start_file);
        e.emplace_back("ridge", num(ridge));
        e.emplace_back("lsm_parallel_paths", lsm_parallel_paths ? "true" : "false");
        e.emplace_back("fd_time_steps", std::to_string(fd_time_steps));
        e.emplace_back("fd_space_steps", std::to_string(fd_space_steps));
        e.emplace_back("fd_s_max", num(fd_grid().s_max));
        e.emplace_back("fd_method", fd_method);
        e.emplace_back("fd_exercise", fd_exercise);
        return e;
    }
};

/// Registers every key as --key on `app`, bound to `cfg`.
inline void add_config_options(CLI::App& app, RunConfig& cfg) {
    app.add_option("command", cfg.command, "price-parallel | price-lsm | price-fd | price-european | table | converge");
    app.add_option("--spot", cfg.market.spot, "initial spot")->capture_default_str();
    app.add_option("--rate", cfg.market.rate, "continuously compounded rate")->capture_default_str();
    app.add_option("--vol", cfg.market.vol, "volatility")->capture_default_str();
    app.add_option("--strike", cfg.market.strike, "put strike")->capture_default_str();
    app.add_option("--maturity", cfg.market.maturity, "maturity in years")->capture_default_str();
    app.add_option("--dates_per_year", cfg.dates_per_year, "exercise dates per year")->capture_default_str();
    app.add_option("--paths", cfg.paths, "total Monte Carlo paths N")->capture_default_str();
    app.add_option("--iterations", cfg.iterations, "parallel-engine iterations n")->capture_default_str();
    app.add_option("--group_size", cfg.group_size, "exercise dates per regression block D")->capture_default_str();
    app.add_option("--basis", cfg.basis, "auto | quadratic | time-quadratic")->capture_default_str();
    app.add_option("--lambda", cfg.lambda, "U/V ramp amplitude")->capture_default_str();
    app.add_option("--mu", cfg.mu, "U/V ramp scale")->capture_default_str();
    app.add_option("--nu", cfg.nu, "price ramp rate")->capture_default_str();
    app.add_option("--beta", cfg.beta, "boundary weight width (default 0.2*strike)");
    app.add_option("--beta_shrink", cfg.beta_shrink, "per-iteration width multiplier")->capture_default_str();
    app.add_option("--boundary_weights", cfg.boundary_weights, "Gaussian boundary weights")->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed (AMC_SEED overrides the config file)")->capture_default_str();
    app.add_option("--workers", cfg.workers, "worker threads")->capture_default_str();
    app.add_option("--bootstrap", cfg.bootstrap, "european | warm-start")->capture_default_str();
    app.add_option("--warm_start_file", cfg.warm_start_file, "coefficient JSON for warm-start");
    app.add_option("--ridge", cfg.ridge, "relative ridge on the normal equations")->capture_default_str();
    app.add_option("--lsm_parallel_paths", cfg.lsm_parallel_paths, "parallel LSM path generation")->capture_default_str();
    app.add_option("--fd_time_steps", cfg.fd_time_steps, "finite-difference time steps")->capture_default_str();
    app.add_option("--fd_space_steps", cfg.fd_space_steps, "finite-difference spot steps")->capture_default_str();
    app.add_option("--fd_s_max", cfg.fd_s_max, "finite-difference grid top (default 4*strike)");
    app.add_option("--fd_method", cfg.fd_method, "projection | psor")->capture_default_str();
    app.add_option("--fd_exercise", cfg.fd_exercise, "american | bermudan")->capture_default_str();
    app.add_option("--axis", cfg.axis, "converge axis: paths | iterations | workers")->capture_default_str();
    app.add_option("--points", cfg.points, "converge sample points")->delimiter(',');
    app.add_option("--repeats", cfg.repeats, "converge repeats per point")->capture_default_str();
    app.add_option("--output_dir", cfg.output_dir, "directory for result.json, trace.csv, table.csv, boundary.csv");
    app.add_option("--format", cfg.format, "stdout format: text | json | csv")->capture_default_str();
    app.add_option("--coefficients_out", cfg.coefficients_out, "write final coefficients (warm-start file)");
    app.set_config("--config", "", "flat key=value config file");
    app.allow_config_extras(false);
}

namespace detail {

inline std::string key_from_cli_error(const std::string& what) {
    const auto dash = what.find("--");
    if (dash != std::string::npos) {
        auto end = what.find_first_of(" =:", dash);
        return what.substr(dash + 2, end == std::string::npos ? std::string::npos : end - dash - 2);
    }
    const auto parse = what.find("parse ");
    if (parse != std::string::npos) return what.substr(parse + 6);
    return "config";
}

}  // namespace detail

/// Parses argv-style arguments (without the program name), applies AMC_SEED
/// unless --seed was given, and validates.
inline RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"amc"};
    add_config_options(app, cfg);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw ConfigError(detail::key_from_cli_error(e.what()), e.what());
    }
    const bool seed_flag = std::any_of(args.begin(), args.end(), [](const std::string& a) {
        return a == "--seed" || a.rfind("--seed=", 0) == 0;
    });
    if (!seed_flag) {
        if (const char* env = std::getenv("AMC_SEED")) {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument(env);
                cfg.seed = v;
            } catch (const std::exception&) {
                throw ConfigError("seed", std::string("AMC_SEED is not an unsigned integer: ") + env);
            }
        }
    }
    if (cfg.command.empty()) throw ConfigError("command", "missing command");
    cfg.validate();
    return cfg;
}

}  // namespace amc
