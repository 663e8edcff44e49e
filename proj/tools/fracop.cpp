// fracop: S-spectrum toolkit for fractional powers of quaternionic vector
// operators. Subcommands: check, solve, scan-resolvent, frac-power,
// oracle-matrix, compat-check.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "fracop/commands.hpp"

namespace {

int thread_count_from_env() {
    if (const char* env = std::getenv("FRACOP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 0;  // Eigen default
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"S-spectrum toolkit: pseudo S-resolvents, solvability checks and "
                 "fractional powers of vector operators"};
    app.require_subcommand(1);
    int threads = thread_count_from_env();
    app.add_option("--threads", threads, "worker thread count (overrides FRACOP_THREADS)");

    std::string config_path;
    bool strict = false;

    auto* check = app.add_subcommand("check", "compute solvability constants and verdicts");
    check->add_option("--config", config_path, "problem config JSON")->required();
    check->add_flag("--strict", strict, "exit 3 when the relevant verdict fails");
    std::string check_out;
    check->add_option("--out", check_out, "write the report JSON here as well");

    auto* solve = app.add_subcommand("solve", "solve Q_s(T) u = F for s = j s1");
    solve->add_option("--config", config_path, "problem config JSON")->required();
    double s1 = 1.0;
    std::string axis = "e1", rhs_path, out_path = "solution.qfield.csv";
    solve->add_option("--s1", s1, "imaginary magnitude of s")->required();
    solve->add_option("--axis", axis, "axis j: e1|e2|e3|random:<seed>");
    solve->add_option("--rhs", rhs_path, "right-hand-side field file")->required();
    solve->add_option("--out", out_path, "output field file");

    auto* scan = app.add_subcommand("scan-resolvent", "norm scan along the imaginary axis");
    scan->add_option("--config", config_path, "problem config JSON")->required();
    double t_min = 1e-2, t_max = 1e2;
    int n_points = 20;
    std::string scan_csv = "scan.csv", scan_json = "scan.json", scan_axis = "e1";
    scan->add_option("--tmin", t_min, "smallest t");
    scan->add_option("--tmax", t_max, "largest t");
    scan->add_option("--points", n_points, "number of log-spaced t values");
    scan->add_option("--axis", scan_axis, "axis j: e1|e2|e3|random:<seed>");
    scan->add_option("--out-csv", scan_csv, "per-t CSV output");
    scan->add_option("--out-json", scan_json, "summary JSON output");

    auto* frac = app.add_subcommand("frac-power", "apply P_alpha(T) to a field");
    frac->add_option("--config", config_path, "problem config JSON")->required();
    std::string in_path, frac_out = "frac_power.qfield.csv", report_path;
    double alpha = -1, trunc = -1;
    int nodes = -1;
    std::string side, frac_axis;
    frac->add_option("--in", in_path, "input field file")->required();
    frac->add_option("--out", frac_out, "output field file");
    frac->add_option("--report", report_path, "report JSON (default <out>.report.json)");
    frac->add_option("--alpha", alpha, "exponent in (0,1); overrides config");
    frac->add_option("--nodes", nodes, "quadrature |t| nodes; overrides config");
    frac->add_option("--trunc", trunc, "log-variable truncation U; overrides config");
    frac->add_option("--side", side, "left|right; overrides config");
    frac->add_option("--axis", frac_axis, "axis j; overrides config");

    auto* oracle = app.add_subcommand("oracle-matrix",
                                      "quadrature vs complex-adjoint eigendecomposition");
    int om_size = 4;
    std::uint64_t om_seed = 1;
    double om_alpha = 0.5, om_trunc = 30.0;
    int om_nodes = 800;
    std::string om_out;
    oracle->add_option("--size", om_size, "matrix dimension");
    oracle->add_option("--seed", om_seed, "random seed");
    oracle->add_option("--alpha", om_alpha, "exponent in (0,1)");
    oracle->add_option("--nodes", om_nodes, "quadrature |t| nodes");
    oracle->add_option("--trunc", om_trunc, "truncation U");
    oracle->add_option("--out", om_out, "report JSON path");

    auto* compat = app.add_subcommand("compat-check", "physical-Robin compatibility");
    compat->add_option("--config", config_path, "problem config JSON")->required();
    compat->add_flag("--strict", strict, "exit 3 on failure");
    std::string compat_out;
    compat->add_option("--out", compat_out, "report JSON path");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) Eigen::setNbThreads(threads);

    try {
        if (check->parsed())
            return fracop::cmd_check(fracop::load_config(config_path), strict, check_out);
        if (solve->parsed())
            return fracop::cmd_solve(fracop::load_config(config_path), s1, axis, rhs_path,
                                     out_path);
        if (scan->parsed())
            return fracop::cmd_scan(fracop::load_config(config_path), t_min, t_max, n_points,
                                    scan_axis, scan_csv, scan_json);
        if (frac->parsed()) {
            fracop::ProblemConfig cfg = fracop::load_config(config_path);
            if (alpha > 0) cfg.quadrature.alpha = alpha;
            if (nodes > 0) cfg.quadrature.n_nodes = nodes;
            if (trunc > 0) cfg.quadrature.trunc = trunc;
            if (!side.empty()) {
                if (side == "left")
                    cfg.quadrature.side = fracop::IntegralSide::left;
                else if (side == "right")
                    cfg.quadrature.side = fracop::IntegralSide::right;
                else
                    throw fracop::ConfigError("--side", "expected left|right");
            }
            if (!frac_axis.empty()) cfg.quadrature.axis = fracop::parse_axis(frac_axis);
            try {
                cfg.quadrature.validate();
            } catch (const std::invalid_argument& e) {
                throw fracop::ConfigError("quadrature", e.what());
            }
            return fracop::cmd_frac_power(cfg, in_path, frac_out, report_path);
        }
        if (oracle->parsed())
            return fracop::cmd_oracle_matrix(om_size, om_seed, om_alpha, om_nodes, om_trunc,
                                             om_out);
        if (compat->parsed())
            return fracop::cmd_compat(fracop::load_config(config_path), strict, compat_out);
    } catch (const fracop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return fracop::kExitConfig;
    } catch (const fracop::SolveError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return fracop::kExitSolver;
    } catch (const fracop::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return fracop::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return fracop::kExitConfig;
}
