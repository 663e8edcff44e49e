#pragma once

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fracop/coefficients.hpp"
#include "fracop/errors.hpp"
#include "fracop/field_io.hpp"
#include "fracop/grid.hpp"
#include "fracop/qfield.hpp"

namespace fracop {

enum class Closure {
    none,        // raw differential operator, one-sided stencils at the boundary
    dirichlet,   // boundary rows are identity rows, zero RHS coupling
    robin_type,  // ghost elimination through sum a_l^2 n_l d_l u + a u = 0
};

inline std::string closure_name(Closure c) {
    switch (c) {
        case Closure::none: return "none";
        case Closure::dirichlet: return "dirichlet";
        default: return "robin_type";
    }
}

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

namespace assembly_detail {

// Left-multiplication blocks of the units 1, e1, e2, e3 as (column, sign)
// per row; the 4N expansion of a component block places one entry per row.
inline constexpr int kLcol[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
inline constexpr double kLsign[4][4] = {
    {1, 1, 1, 1}, {-1, 1, -1, 1}, {-1, 1, 1, -1}, {-1, -1, 1, 1}};

// Unit product e_c e_d = sign * e_k.
inline constexpr int kProd[4][4] = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
inline constexpr double kProdSign[4][4] = {
    {1, 1, 1, 1}, {1, -1, 1, -1}, {1, -1, -1, 1}, {1, 1, -1, -1}};

struct StencilEntry {
    std::int64_t col;
    double coeff;
};

/// Second-order first-derivative stencil along `axis` at node (i,j,k):
/// central where both neighbours exist, one-sided second order at a face.
inline int derivative_stencil(const Grid& g, int i, int j, int k, int axis,
                              StencilEntry out[3]) {
    const int si = axis == 0, sj = axis == 1, sk = axis == 2;
    const auto at = [&](int d) { return g.index(i + d * si, j + d * sj, k + d * sk); };
    const double inv2h = 1.0 / (2.0 * g.h);
    const int side = g.exit_side(i, j, k, axis);
    if (side == 0) {
        out[0] = {at(-1), -inv2h};
        out[1] = {at(+1), +inv2h};
        return 2;
    }
    if (side < 0) {
        out[0] = {at(0), -3.0 * inv2h};
        out[1] = {at(+1), 4.0 * inv2h};
        out[2] = {at(+2), -1.0 * inv2h};
        return 3;
    }
    out[0] = {at(0), 3.0 * inv2h};
    out[1] = {at(-1), -4.0 * inv2h};
    out[2] = {at(-2), 1.0 * inv2h};
    return 3;
}

}  // namespace assembly_detail

/// Sparse real 4N x 4N representation of a right-linear quaternionic grid
/// operator, kept as four N x N real component blocks:
///   A = sum_c L_{e_c} (x) block[c],  e_0 := 1.
/// The block form is what makes exact composition and the Scal/Vect split
/// cheap; `matrix()` expands to the flat 4N x 4N form used by solvers.
struct AssembledOperator {
    Grid grid;
    Closure closure{Closure::none};
    std::array<SpMat, 4> block;
    std::optional<Quaternion> spectral_param;  // set for Q_s(T), empty for T
    std::shared_ptr<const CoefficientSet> coeffs;

    std::int64_t dim() const { return 4 * grid.node_count(); }

    SpMat matrix() const {
        using namespace assembly_detail;
        std::vector<Triplet> trip;
        std::int64_t nnz = 0;
        for (int c = 0; c < 4; ++c) nnz += block[c].nonZeros();
        trip.reserve(4 * nnz);
        for (int c = 0; c < 4; ++c) {
            for (int outer = 0; outer < block[c].outerSize(); ++outer)
                for (SpMat::InnerIterator it(block[c], outer); it; ++it)
                    for (int r = 0; r < 4; ++r)
                        trip.emplace_back(4 * it.row() + r, 4 * it.col() + kLcol[c][r],
                                          kLsign[c][r] * it.value());
        }
        SpMat m(dim(), dim());
        m.setFromTriplets(trip.begin(), trip.end());
        return m;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        using namespace assembly_detail;
        const std::int64_t n = grid.node_count();
        std::array<Eigen::VectorXd, 4> comp, out;
        for (int c = 0; c < 4; ++c) {
            comp[c].resize(n);
            for (std::int64_t i = 0; i < n; ++i) comp[c][i] = v[4 * i + c];
        }
        for (int r = 0; r < 4; ++r) out[r] = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < 4; ++c) {
            if (block[c].nonZeros() == 0) continue;
            for (int r = 0; r < 4; ++r) {
                const Eigen::VectorXd t = block[c] * comp[kLcol[c][r]];
                out[r] += kLsign[c][r] * t;
            }
        }
        Eigen::VectorXd res(4 * n);
        for (std::int64_t i = 0; i < n; ++i)
            for (int r = 0; r < 4; ++r) res[4 * i + r] = out[r][i];
        return res;
    }

    QField apply(const QField& u) const {
        if (u.grid != grid) throw GridMismatchError("AssembledOperator: field grid mismatch");
        return QField(grid, apply(u.data));
    }

    /// A^T on the flat layout; block-wise (L_c (x) S_c)^T = L_c^T (x) S_c^T
    /// with L_c^T = -L_c for the imaginary units.
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
        using namespace assembly_detail;
        const std::int64_t n = grid.node_count();
        std::array<Eigen::VectorXd, 4> comp, out;
        for (int c = 0; c < 4; ++c) {
            comp[c].resize(n);
            for (std::int64_t i = 0; i < n; ++i) comp[c][i] = v[4 * i + c];
        }
        for (int r = 0; r < 4; ++r) out[r] = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < 4; ++c) {
            if (block[c].nonZeros() == 0) continue;
            for (int r = 0; r < 4; ++r) {
                // entry (4i+r, 4j+kLcol[c][r]) of the forward map transposes
                // to component kLcol[c][r] <- r with the same sign
                const Eigen::VectorXd t = block[c].transpose() * comp[r];
                out[kLcol[c][r]] += kLsign[c][r] * t;
            }
        }
        Eigen::VectorXd res(4 * n);
        for (std::int64_t i = 0; i < n; ++i)
            for (int r = 0; r < 4; ++r) res[4 * i + r] = out[r][i];
        return res;
    }
};

/// Discrete T = sum_l e_l a_l(x) d/dx_l with the requested boundary closure.
/// Interior nodes always use central differences; what happens on the
/// boundary rows depends on the closure:
///  - none:       one-sided second-order stencils (the raw operator),
///  - dirichlet:  identity rows,
///  - robin_type: central differences with ghost values eliminated through
///                the Robin-type facet relation, one facet per exiting
///                direction (so edge and corner nodes are closed through
///                each of their facets).
inline AssembledOperator assemble_T(std::shared_ptr<const CoefficientSet> cs, const Grid& grid,
                                    Closure closure) {
    using namespace assembly_detail;
    if (cs->grid != grid) throw GridMismatchError("assemble_T: coefficients on different grid");
    cs->check_finite();

    const std::int64_t n = grid.node_count();
    std::array<std::vector<Triplet>, 4> trip;
    for (int l = 1; l < 4; ++l) trip[l].reserve(2 * n);

    StencilEntry st[3];
    for (int k = 0; k < grid.nz; ++k)
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const std::int64_t row = grid.index(i, j, k);
                const bool bnd = grid.is_boundary(i, j, k);
                if (bnd && closure == Closure::dirichlet) {
                    trip[0].emplace_back(row, row, 1.0);
                    continue;
                }
                for (int axis = 0; axis < 3; ++axis) {
                    const double al = cs->a[axis][row];
                    const int side = grid.exit_side(i, j, k, axis);
                    if (bnd && closure == Closure::robin_type && side != 0) {
                        // Ghost elimination: sigma a_d^2 d_d u + a u = 0 on the
                        // facet determines the ghost value; only a zeroth-order
                        // coupling at the node itself survives. Edge and corner
                        // nodes resolve each exiting direction through its own
                        // facet relation (the boundary-operator rows keep the
                        // dominant-facet normal convention).
                        if (std::abs(al) < 1e-14)
                            throw SolveError("robin_type closure singular (a_l ~ 0) at node (" +
                                             std::to_string(i) + "," + std::to_string(j) + "," +
                                             std::to_string(k) + ")");
                        const double c = -double(side) * cs->a_robin[row] / al;
                        if (c != 0.0) trip[axis + 1].emplace_back(row, row, c);
                        continue;
                    }
                    const int m = derivative_stencil(grid, i, j, k, axis, st);
                    for (int e = 0; e < m; ++e)
                        trip[axis + 1].emplace_back(row, st[e].col, al * st[e].coeff);
                }
            }

    AssembledOperator op;
    op.grid = grid;
    op.closure = closure;
    op.coeffs = std::move(cs);
    for (int c = 0; c < 4; ++c) {
        op.block[c].resize(n, n);
        op.block[c].setFromTriplets(trip[c].begin(), trip[c].end());
    }
    return op;
}

/// Q_s(T) = T^2 - 2 Re(s) T + |s|^2 I as the exact sparse composition of the
/// already-closed discrete T. Composing (rather than re-discretising second
/// derivatives) is what makes the S-resolvent identities hold at the matrix
/// level, which the fractional-power quadrature relies on.
inline AssembledOperator assemble_Q(const SpectralParam& s, const AssembledOperator& T) {
    using namespace assembly_detail;
    const std::int64_t n = T.grid.node_count();

    std::array<SpMat, 4> q;
    for (int k = 0; k < 4; ++k) q[k] = SpMat(n, n);
    for (int c = 0; c < 4; ++c) {
        if (T.block[c].nonZeros() == 0) continue;
        for (int d = 0; d < 4; ++d) {
            if (T.block[d].nonZeros() == 0) continue;
            const int k = kProd[c][d];
            const SpMat prod = (T.block[c] * T.block[d]).pruned();
            q[k] += kProdSign[c][d] * prod;
        }
    }
    for (int k = 0; k < 4; ++k)
        if (T.block[k].nonZeros() != 0) q[k] -= 2.0 * s.s0 * T.block[k];
    {
        SpMat id(n, n);
        id.setIdentity();
        q[0] += s.abs2 * id;
    }

    if (T.closure == Closure::dirichlet) {
        // Restore plain identity rows on the boundary (the composition left
        // them scaled); identical action on fields that vanish there.
        std::vector<char> bnd(n, 0);
        for (int kk = 0; kk < T.grid.nz; ++kk)
            for (int jj = 0; jj < T.grid.ny; ++jj)
                for (int ii = 0; ii < T.grid.nx; ++ii)
                    if (T.grid.is_boundary(ii, jj, kk)) bnd[T.grid.index(ii, jj, kk)] = 1;
        for (int k = 0; k < 4; ++k)
            q[k].prune([&](int row, int, double) { return !bnd[row]; });
        std::vector<Triplet> ident;
        for (std::int64_t r = 0; r < n; ++r)
            if (bnd[r]) ident.emplace_back(r, r, 1.0);
        SpMat idb(n, n);
        idb.setFromTriplets(ident.begin(), ident.end());
        q[0] += idb;
    }

    AssembledOperator op;
    op.grid = T.grid;
    op.closure = T.closure;
    op.coeffs = T.coeffs;
    op.spectral_param = s.s;
    for (int k = 0; k < 4; ++k) {
        q[k].makeCompressed();
        op.block[k] = std::move(q[k]);
    }
    return op;
}

/// Split Q_s(T) into its scalar part (real component block, the
/// -(a_l d_l)^2 + |s|^2 part) and vector part (the e_1, e_2, e_3 commutator
/// blocks together with -2 Re(s) T). The two summands reproduce Q exactly.
inline std::pair<AssembledOperator, AssembledOperator> scal_vect_decompose(
    const AssembledOperator& Q) {
    if (!Q.spectral_param)
        throw std::invalid_argument("scal_vect_decompose: operator carries no spectral parameter");
    AssembledOperator scal, vect;
    scal.grid = vect.grid = Q.grid;
    scal.closure = vect.closure = Q.closure;
    scal.coeffs = vect.coeffs = Q.coeffs;
    scal.spectral_param = vect.spectral_param = Q.spectral_param;
    const std::int64_t n = Q.grid.node_count();
    for (int k = 0; k < 4; ++k) {
        scal.block[k] = SpMat(n, n);
        vect.block[k] = SpMat(n, n);
    }
    scal.block[0] = Q.block[0];
    for (int k = 1; k < 4; ++k) vect.block[k] = Q.block[k];
    return {std::move(scal), std::move(vect)};
}

enum class BoundaryRowFlavor { robin_type, physical };

/// Rows of the discrete boundary operator itself, as a scalar N x N matrix
/// with nonzeros only on boundary-node rows:
///   robin_type: sum_l a_l^2 n_l d_l + a I   (the closure's defining relation)
///   physical:   sum_l a_l   n_l d_l + b I   (the heat-flux Robin condition)
/// Normals follow the dominant-facet convention, derivatives are one-sided
/// second order into the domain. Used directly by the compatibility check.
inline SpMat boundary_operator_rows(const CoefficientSet& cs, const Grid& grid,
                                    BoundaryRowFlavor flavor) {
    using namespace assembly_detail;
    if (flavor == BoundaryRowFlavor::physical && !cs.has_b_phys())
        throw std::invalid_argument("boundary_operator_rows: b_phys field missing");
    std::vector<Triplet> trip;
    StencilEntry st[3];
    for (int k = 0; k < grid.nz; ++k)
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                if (!grid.is_boundary(i, j, k)) continue;
                const std::int64_t row = grid.index(i, j, k);
                const auto nrm = grid.dominant_normal(i, j, k);
                const int axis = nrm[0];
                const double sigma = nrm[1];
                const double al = cs.a[axis][row];
                const double deriv_coeff =
                    flavor == BoundaryRowFlavor::robin_type ? sigma * al * al : sigma * al;
                const int m = derivative_stencil(grid, i, j, k, axis, st);
                for (int e = 0; e < m; ++e)
                    trip.emplace_back(row, st[e].col, deriv_coeff * st[e].coeff);
                const double zeroth =
                    flavor == BoundaryRowFlavor::robin_type ? cs.a_robin[row] : cs.b_phys[row];
                if (zeroth != 0.0) trip.emplace_back(row, row, zeroth);
            }
    SpMat m(grid.node_count(), grid.node_count());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

/// Derivative of one quaternion component field (central interior, one-sided
/// at faces); the bilinear-form evaluator differentiates fields with exactly
/// the stencils the assembled operator uses.
inline Eigen::VectorXd apply_component_derivative(const Eigen::VectorXd& f, const Grid& g,
                                                  int axis) {
    using namespace assembly_detail;
    Eigen::VectorXd out(g.node_count());
    StencilEntry st[3];
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int m = derivative_stencil(g, i, j, k, axis, st);
                double acc = 0;
                for (int e = 0; e < m; ++e) acc += st[e].coeff * f[st[e].col];
                out[g.index(i, j, k)] = acc;
            }
    return out;
}

/// Component-wise derivative of a quaternion field.
inline QField field_derivative(const QField& u, int axis) {
    const Grid& g = u.grid;
    const std::int64_t n = g.node_count();
    std::array<Eigen::VectorXd, 4> comp;
    for (int c = 0; c < 4; ++c) {
        comp[c].resize(n);
        for (std::int64_t i = 0; i < n; ++i) comp[c][i] = u.data[4 * i + c];
        comp[c] = apply_component_derivative(comp[c], g, axis);
    }
    QField out(g);
    for (std::int64_t i = 0; i < n; ++i)
        out.set(i, Quaternion{comp[0][i], comp[1][i], comp[2][i], comp[3][i]});
    return out;
}

/// Coordinate-format export `row,col,value` with header
/// `QOP,dim,boundary_kind,s0,s1`, for offline inspection.
inline void export_operator(const AssembledOperator& op, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    double s0 = 0, s1 = 0;
    if (op.spectral_param) {
        s0 = op.spectral_param->re();
        s1 = op.spectral_param->vec_norm();
    }
    os << "QOP," << op.dim() << "," << closure_name(op.closure) << ","
       << io_detail::fmt_full(s0) << "," << io_detail::fmt_full(s1) << "\n";
    SpMat m = op.matrix();
    m.makeCompressed();
    std::vector<std::array<std::int64_t, 2>> order;
    order.reserve(m.nonZeros());
    for (int outer = 0; outer < m.outerSize(); ++outer)
        for (SpMat::InnerIterator it(m, outer); it; ++it)
            order.push_back({it.row(), it.col()});
    std::sort(order.begin(), order.end());
    for (const auto& rc : order)
        os << rc[0] << "," << rc[1] << "," << io_detail::fmt_full(m.coeff(rc[0], rc[1]))
           << "\n";
    if (!os) throw IoError("write failure on '" + path + "'");
}

}  // namespace fracop
