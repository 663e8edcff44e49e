#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include "fracop/assembly.hpp"
#include "fracop/coefficients.hpp"
#include "fracop/grid.hpp"
#include "fracop/qfield.hpp"

namespace fracop {

struct Verdict {
    bool pass{false};
    double margin{0};
};

/// Every constant of the solvability hypotheses plus the verdicts they
/// imply. Strict inequalities are evaluated with zero slack: margin <= 0
/// fails. The trace constant has no usable closed form, so its provenance
/// (user-supplied or heuristic) is carried along with the verdicts that rest
/// on it.
struct ConditionReport {
    double C_T{0};
    double C_T_prime{0};
    double K_a_Omega{0};
    double C_P{0};
    double C_dOmega{0};
    std::string C_dOmega_provenance;  // "user" | "heuristic"
    double M{0};
    double K3{4.0};  // K_n = (2n-2)/(n-2) at n = 3

    double kappa_Omega{0};  // C_T - C_T' C_P - K_{a,Omega} (1 + C_P^2)
    Verdict bounded;
    std::optional<double> C_bounded;  // 1 - C_T' C_P / C_T - K (1+C_P^2)/C_T, on pass

    Verdict unbounded;  // margin = C_T - K3 M
    bool unbounded_inconclusive{false};
    std::optional<double> C_unbounded;  // (C_T - K3 M)/C_T, on pass

    std::optional<double> compat_mu;
    std::optional<bool> compat_pass;
};

/// Default trace-constant heuristic max(1, sqrt(|dOmega|/|Omega|) (1+diam)).
/// Not rigorous; verdicts computed from it say so via the provenance tag.
inline double heuristic_trace_constant(const Grid& g) {
    return std::max(1.0, std::sqrt(g.surface_area() / g.volume()) * (1.0 + g.diameter()));
}

inline ConditionReport compute_constants(const CoefficientSet& cs, const Grid& grid,
                                         std::optional<double> c_trace = std::nullopt) {
    if (cs.grid != grid) throw GridMismatchError("compute_constants: grid mismatch");
    cs.check_finite();
    const std::int64_t n = grid.node_count();

    ConditionReport r;
    r.C_T = std::numeric_limits<double>::infinity();
    for (int l = 0; l < 3; ++l) r.C_T = std::min(r.C_T, cs.a[l].cwiseAbs2().minCoeff());

    // C_T' = sum_{i,l} sup |a_l d_l(a_i)|  (node-wise sup of each product)
    r.C_T_prime = 0;
    for (int l = 0; l < 3; ++l)
        for (int i = 0; i < 3; ++i)
            r.C_T_prime += (cs.a[l].array() * cs.da[l][i].array()).abs().maxCoeff();

    double sup_a = 0;
    for (int k = 0; k < grid.nz; ++k)
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                if (grid.is_boundary(i, j, k))
                    sup_a = std::max(sup_a, std::abs(cs.a_robin[grid.index(i, j, k)]));

    // Poincare-Wirtinger on a convex domain: diam/pi is rigorous for boxes.
    r.C_P = grid.diameter() / M_PI;
    if (c_trace) {
        r.C_dOmega = *c_trace;
        r.C_dOmega_provenance = "user";
    } else {
        r.C_dOmega = heuristic_trace_constant(grid);
        r.C_dOmega_provenance = "heuristic";
    }
    r.K_a_Omega = r.C_dOmega * r.C_dOmega * sup_a;

    // M = sum_{i,j} || a_i d_i(a_j) ||_{L^3}
    r.M = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::VectorXd prod = cs.a[i].array() * cs.da[i][j].array();
            r.M += discrete_lp_norm(prod, 3.0, grid);
        }
    (void)n;
    return r;
}

/// Bounded Robin-type solvability: C_T > 0 and
/// kappa_Omega = C_T - C_T' C_P - K_{a,Omega}(1 + C_P^2) > 0.
inline void check_bounded(ConditionReport& r) {
    r.kappa_Omega = r.C_T - r.C_T_prime * r.C_P - r.K_a_Omega * (1.0 + r.C_P * r.C_P);
    r.bounded.margin = r.kappa_Omega;
    r.bounded.pass = r.kappa_Omega > 0.0 && r.C_T > 0.0;
    if (r.bounded.pass)
        r.C_bounded = 1.0 - r.C_T_prime * r.C_P / r.C_T -
                      r.K_a_Omega * (1.0 + r.C_P * r.C_P) / r.C_T;
    else
        r.C_bounded.reset();
}

/// Unbounded Dirichlet solvability: C_T > 0 and C_T - K3 M > 0, with
/// K3 = 4. A non-finite M on the truncated box is inconclusive, not a fail.
inline void check_unbounded(ConditionReport& r) {
    if (!std::isfinite(r.M)) {
        r.unbounded_inconclusive = true;
        r.unbounded.pass = false;
        r.unbounded.margin = std::numeric_limits<double>::quiet_NaN();
        r.C_unbounded.reset();
        return;
    }
    r.unbounded_inconclusive = false;
    r.unbounded.margin = r.C_T - r.K3 * r.M;
    r.unbounded.pass = r.unbounded.margin > 0.0 && r.C_T > 0.0;
    if (r.unbounded.pass)
        r.C_unbounded = (r.C_T - r.K3 * r.M) / r.C_T;
    else
        r.C_unbounded.reset();
}

struct CompatReport {
    bool pass{false};
    std::optional<double> mu;
    double max_coeff_defect{0};   // max over boundary of |a_l - mu|
    double max_data_defect{0};    // max over boundary of |a - mu b|
    double max_row_defect{0};     // max entry of (robin-type rows) - mu (physical rows)
    std::optional<std::array<int, 3>> first_offending_node;
};

/// Physical-Robin compatibility: a_l = mu on the boundary, a = mu b there,
/// and then the assembled Robin-type boundary rows equal mu times the
/// physical rows entry-wise.
inline CompatReport check_compatibility(const CoefficientSet& cs, const Grid& grid,
                                        double tol = 1e-12) {
    if (!cs.has_b_phys() || !cs.mu)
        throw std::invalid_argument("check_compatibility: b_phys and mu must be present");
    CompatReport rep;
    const double mu = *cs.mu;
    rep.mu = mu;
    for (int k = 0; k < grid.nz && !rep.first_offending_node; ++k)
        for (int j = 0; j < grid.ny && !rep.first_offending_node; ++j)
            for (int i = 0; i < grid.nx && !rep.first_offending_node; ++i) {
                if (!grid.is_boundary(i, j, k)) continue;
                const auto id = grid.index(i, j, k);
                double defect = 0;
                for (int l = 0; l < 3; ++l) defect = std::max(defect, std::abs(cs.a[l][id] - mu));
                rep.max_coeff_defect = std::max(rep.max_coeff_defect, defect);
                const double data_defect = std::abs(cs.a_robin[id] - mu * cs.b_phys[id]);
                rep.max_data_defect = std::max(rep.max_data_defect, data_defect);
                if (defect > tol || data_defect > tol) rep.first_offending_node = {{i, j, k}};
            }
    if (rep.first_offending_node) {
        rep.pass = false;
        return rep;
    }
    const SpMat rt = boundary_operator_rows(cs, grid, BoundaryRowFlavor::robin_type);
    const SpMat ph = boundary_operator_rows(cs, grid, BoundaryRowFlavor::physical);
    SpMat diff = rt - mu * ph;
    rep.max_row_defect = 0;
    double scale = 1.0;
    for (int outer = 0; outer < rt.outerSize(); ++outer)
        for (SpMat::InnerIterator it(rt, outer); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    for (int outer = 0; outer < diff.outerSize(); ++outer)
        for (SpMat::InnerIterator it(diff, outer); it; ++it)
            rep.max_row_defect = std::max(rep.max_row_defect, std::abs(it.value()));
    rep.pass = rep.max_row_defect <= 1e-13 * scale;
    return rep;
}

}  // namespace fracop
