#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "fracop/conditions.hpp"
#include "fracop/config.hpp"
#include "fracop/matrix_oracle.hpp"
#include "fracop/solve.hpp"

#ifndef FRACOP_VERSION
#define FRACOP_VERSION "0.0.0"
#endif

namespace fracop {

// Exit codes shared with the CLI: 0 ok, 2 config error, 3 condition-verdict
// fail under --strict, 4 solver failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitVerdict = 3;
inline constexpr int kExitSolver = 4;

namespace cmd_detail {

using nlohmann::json;

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

/// Run manifest: config hash, versions and timings. Written next to the
/// primary output; timings make it the one non-reproducible artifact, so it
/// never doubles as a result file.
inline void write_manifest(const std::string& out_path, const std::string& command,
                           const std::string& canonical_config, double elapsed_ms,
                           const json& extra = json::object()) {
    json m;
    m["command"] = command;
    m["config_hash"] = hex64(fnv1a(canonical_config));
    m["library_version"] = FRACOP_VERSION;
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["elapsed_ms"] = elapsed_ms;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream os(out_path);
    os << m.dump(2) << "\n";
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << j.dump(2) << "\n";
}

inline json condition_report_json(const ConditionReport& r,
                                  const std::optional<CompatReport>& compat) {
    json j;
    j["C_T"] = r.C_T;
    j["C_T_prime"] = r.C_T_prime;
    j["K_a_Omega"] = r.K_a_Omega;
    j["C_P"] = r.C_P;
    j["C_dOmega"] = {{"value", r.C_dOmega}, {"provenance", r.C_dOmega_provenance}};
    j["M"] = r.M;
    j["K3"] = r.K3;
    j["bounded"] = {{"pass", r.bounded.pass},
                    {"margin", r.bounded.margin},
                    {"kappa_Omega", r.kappa_Omega}};
    if (r.C_bounded) j["bounded"]["C"] = *r.C_bounded;
    j["unbounded"] = {{"pass", r.unbounded.pass}, {"inconclusive", r.unbounded_inconclusive}};
    if (!r.unbounded_inconclusive) j["unbounded"]["margin"] = r.unbounded.margin;
    if (r.C_unbounded) j["unbounded"]["C"] = *r.C_unbounded;
    if (compat) {
        j["compat"] = {{"pass", compat->pass},
                       {"mu", compat->mu ? json(*compat->mu) : json()},
                       {"max_coeff_defect", compat->max_coeff_defect},
                       {"max_data_defect", compat->max_data_defect},
                       {"max_row_defect", compat->max_row_defect}};
        if (compat->first_offending_node)
            j["compat"]["first_offending_node"] = *compat->first_offending_node;
    }
    return j;
}

inline std::shared_ptr<ResolventSolver> make_solver(const ProblemConfig& cfg) {
    const Closure closure = cfg.grid.boundary_kind == BoundaryKind::dirichlet
                                ? Closure::dirichlet
                                : Closure::robin_type;
    auto T = std::make_shared<AssembledOperator>(assemble_T(cfg.coeffs, cfg.grid, closure));
    return std::make_shared<ResolventSolver>(std::move(T), cfg.solver);
}

}  // namespace cmd_detail

/// `check`: every constant plus both verdicts (and the physical-Robin
/// compatibility when its data is present) as one JSON document.
inline int cmd_check(const ProblemConfig& cfg, bool strict, const std::string& out_json,
                     std::ostream& log = std::cout) {
    cmd_detail::Stopwatch sw;
    ConditionReport r = compute_constants(*cfg.coeffs, cfg.grid, cfg.trace_constant);
    check_bounded(r);
    check_unbounded(r);
    std::optional<CompatReport> compat;
    if (cfg.coeffs->has_b_phys() && cfg.coeffs->mu)
        compat = check_compatibility(*cfg.coeffs, cfg.grid);
    const nlohmann::json j = cmd_detail::condition_report_json(r, compat);
    if (!out_json.empty()) {
        cmd_detail::write_json_file(out_json, j);
        cmd_detail::write_manifest(out_json + ".manifest.json", "check", cfg.canonical, sw.ms());
    }
    log << j.dump(2) << "\n";
    const bool relevant_pass =
        cfg.grid.boundary_kind == BoundaryKind::robin_type ? r.bounded.pass : r.unbounded.pass;
    if (strict && !relevant_pass) return kExitVerdict;
    return kExitOk;
}

/// `solve --s1 <t> --axis <j> --rhs <file>`: one pseudo-S-resolvent
/// application Q_{j t}^{-1} F written as a field file.
inline int cmd_solve(const ProblemConfig& cfg, double s1, const std::string& axis_spec,
                     const std::string& rhs_path, const std::string& out_path) {
    cmd_detail::Stopwatch sw;
    const Quaternion axis = parse_axis(axis_spec);
    const QField F = load_qfield(rhs_path, cfg.grid.boundary_kind);
    if (Grid(F.grid.nx, F.grid.ny, F.grid.nz, F.grid.h, F.grid.origin,
             cfg.grid.boundary_kind) != cfg.grid)
        throw ConfigError("rhs", "field geometry does not match the configured grid");
    auto solver = cmd_detail::make_solver(cfg);
    const SpectralParam s = SpectralParam::imaginary(axis, s1);
    const QField u(cfg.grid, solver->solve(s, F.data));
    save_qfield(u, out_path);
    cmd_detail::write_manifest(out_path + ".manifest.json", "solve", cfg.canonical, sw.ms(),
                               {{"s1", s1}, {"axis", axis_spec}});
    return kExitOk;
}

/// `scan-resolvent`: CSV of per-t norms plus a JSON summary with theta_hat
/// and the formula comparison when the conditions verdict supplies C.
inline int cmd_scan(const ProblemConfig& cfg, double t_min, double t_max, int n_points,
                    const std::string& axis_spec, const std::string& out_csv,
                    const std::string& out_json) {
    cmd_detail::Stopwatch sw;
    const Quaternion axis = parse_axis(axis_spec);
    ConditionReport cr = compute_constants(*cfg.coeffs, cfg.grid, cfg.trace_constant);
    check_bounded(cr);
    check_unbounded(cr);
    std::optional<double> C = cfg.grid.boundary_kind == BoundaryKind::robin_type
                                  ? cr.C_bounded
                                  : cr.C_unbounded;
    auto solver = cmd_detail::make_solver(cfg);
    const ResolventScan scan = resolvent_scan(*solver, t_min, t_max, n_points, axis, C);

    std::ofstream os(out_csv);
    if (!os) throw IoError("cannot open '" + out_csv + "' for writing");
    os << "t,normQinv,normSL,normSR,t2normQinv,tnormSL,tnormSR\n";
    for (const auto& row : scan.rows) {
        if (!row.error.empty()) {
            os << io_detail::fmt_full(row.t) << ",error,error,error,error,error,error\n";
            continue;
        }
        os << io_detail::fmt_full(row.t) << "," << io_detail::fmt_full(row.norm_Qinv) << ","
           << io_detail::fmt_full(row.norm_SL) << "," << io_detail::fmt_full(row.norm_SR) << ","
           << io_detail::fmt_full(row.t * row.t * row.norm_Qinv) << ","
           << io_detail::fmt_full(row.t * row.norm_SL) << ","
           << io_detail::fmt_full(row.t * row.norm_SR) << "\n";
    }
    os.close();

    nlohmann::json j;
    j["theta_hat"] = scan.theta_hat;
    j["sup_t2_Qinv"] = scan.sup_t2_Qinv;
    j["partial"] = scan.partial;
    if (scan.theta_formula) {
        j["theta_formula"] = *scan.theta_formula;
        j["theta_ok"] = scan.theta_hat <= *scan.theta_formula * 1.1;
    }
    if (C) j["C"] = *C;
    cmd_detail::write_json_file(out_json, j);
    cmd_detail::write_manifest(out_json + ".manifest.json", "scan-resolvent", cfg.canonical,
                               sw.ms(), {{"axis", axis_spec}});
    return scan.partial ? kExitSolver : kExitOk;
}

/// `frac-power`: P_alpha(T) applied to a field file, with the quadrature
/// report alongside.
inline int cmd_frac_power(const ProblemConfig& cfg, const std::string& in_path,
                          const std::string& out_path, const std::string& report_path) {
    cmd_detail::Stopwatch sw;
    const QField v = load_qfield(in_path, cfg.grid.boundary_kind);
    if (Grid(v.grid.nx, v.grid.ny, v.grid.nz, v.grid.h, v.grid.origin,
             cfg.grid.boundary_kind) != cfg.grid)
        throw ConfigError("input", "field geometry does not match the configured grid");
    auto solver = cmd_detail::make_solver(cfg);
    const AxisOperator op = make_axis_operator(solver, cfg.quadrature.axis);
    const FracPowerReport rep = frac_power_apply(cfg.quadrature, v.data, op);
    save_qfield(QField(cfg.grid, rep.result), out_path);

    nlohmann::json j;
    j["alpha"] = cfg.quadrature.alpha;
    j["n_nodes"] = cfg.quadrature.n_nodes;
    j["trunc"] = cfg.quadrature.trunc;
    j["side"] = cfg.quadrature.side == IntegralSide::left ? "left" : "right";
    j["est_error"] = rep.est_error;
    j["norm_near"] = rep.norm_near;
    j["norm_mid"] = rep.norm_mid;
    j["norm_tail"] = rep.norm_tail;
    j["norm_total"] = rep.norm_total;
    const std::string rpath = report_path.empty() ? out_path + ".report.json" : report_path;
    cmd_detail::write_json_file(rpath, j);
    cmd_detail::write_manifest(out_path + ".manifest.json", "frac-power", cfg.canonical, sw.ms());
    return kExitOk;
}

/// `oracle-matrix`: Balakrishnan quadrature vs complex-adjoint
/// eigendecomposition on a random right-spectrum quaternionic matrix.
inline int cmd_oracle_matrix(int size, std::uint64_t seed, double alpha, int n_nodes,
                             double trunc, const std::string& out_json,
                             std::ostream& log = std::cout) {
    cmd_detail::Stopwatch sw;
    const MatrixOracleReport rep = matrix_oracle(size, seed, alpha, n_nodes, trunc);
    nlohmann::json j;
    j["n"] = rep.n;
    j["seed"] = rep.seed;
    j["alpha"] = rep.alpha;
    j["rel_diff"] = rep.rel_diff;
    j["oracle_cond"] = rep.oracle_cond;
    j["quad_est_error"] = rep.quad_est_error;
    if (!out_json.empty()) {
        cmd_detail::write_json_file(out_json, j);
        cmd_detail::write_manifest(out_json + ".manifest.json", "oracle-matrix",
                                   "oracle-matrix:" + std::to_string(size) + ":" +
                                       std::to_string(seed) + ":" + std::to_string(alpha),
                                   sw.ms(), {{"seed", seed}});
    }
    log << j.dump(2) << "\n";
    return kExitOk;
}

/// `compat-check`: the physical-Robin comparison on its own.
inline int cmd_compat(const ProblemConfig& cfg, bool strict, const std::string& out_json,
                      std::ostream& log = std::cout) {
    cmd_detail::Stopwatch sw;
    const CompatReport rep = check_compatibility(*cfg.coeffs, cfg.grid);
    nlohmann::json j;
    j["pass"] = rep.pass;
    if (rep.mu) j["mu"] = *rep.mu;
    j["max_coeff_defect"] = rep.max_coeff_defect;
    j["max_data_defect"] = rep.max_data_defect;
    j["max_row_defect"] = rep.max_row_defect;
    if (rep.first_offending_node) j["first_offending_node"] = *rep.first_offending_node;
    if (!out_json.empty()) {
        cmd_detail::write_json_file(out_json, j);
        cmd_detail::write_manifest(out_json + ".manifest.json", "compat-check", cfg.canonical,
                                   sw.ms());
    }
    log << j.dump(2) << "\n";
    if (strict && !rep.pass) return kExitVerdict;
    return kExitOk;
}

}  // namespace fracop
