#pragma once

#include <array>
#include <string>

#include "fracop/assembly.hpp"
#include "fracop/coefficients.hpp"
#include "fracop/qfield.hpp"

namespace fracop {

/// The summands of the bilinear form b_s(u,v), retrievable separately:
///   grad_grad : sum_l < a_l d_l u, a_l d_l v >
///   grad_coeff: 1/2 sum_l < d_l u, d_l(a_l^2) v >
///   vect      : < Vect(Q_s(T)) u, v >   (commutators and -2 Re(s) T)
///   mass      : |s|^2 < u, v >
///   boundary  : int_dOmega a conj(u) v dS   (Robin-type form only)
struct BilinearTerms {
    Quaternion grad_grad, grad_coeff, vect, mass, boundary;
    Quaternion total() const { return grad_grad + grad_coeff + vect + mass + boundary; }
};

/// T u evaluated through the plain derivative stencils (no closure); the
/// form b_s is a quadrature of the defining integrals, so it differentiates
/// raw fields.
inline QField apply_T_fields(const CoefficientSet& cs, const QField& u) {
    const Grid& g = u.grid;
    const std::array<QField, 3> du = {field_derivative(u, 0), field_derivative(u, 1),
                                      field_derivative(u, 2)};
    QField out(g);
    const std::int64_t n = g.node_count();
    const Quaternion e[3] = {Quaternion::e1(), Quaternion::e2(), Quaternion::e3()};
    for (std::int64_t i = 0; i < n; ++i) {
        Quaternion acc;
        for (int l = 0; l < 3; ++l) acc = acc + e[l] * (du[l].q(i) * cs.a[l][i]);
        out.set(i, acc);
    }
    return out;
}

/// Vect(Q_s(T)) u from the coefficient fields:
///   e1 (a3 d3(a2) d2 - a2 d2(a3) d3) u
/// + e2 (a3 d3(a1) d1 - a1 d1(a3) d3) u
/// + e3 (a1 d1(a2) d2 - a2 d2(a1) d1) u  -  2 Re(s) T u.
inline QField apply_vect_fields(const SpectralParam& s, const CoefficientSet& cs,
                                const QField& u) {
    const Grid& g = u.grid;
    const std::array<QField, 3> du = {field_derivative(u, 0), field_derivative(u, 1),
                                      field_derivative(u, 2)};
    const std::int64_t n = g.node_count();
    const Quaternion e[3] = {Quaternion::e1(), Quaternion::e2(), Quaternion::e3()};
    struct Half {
        int a_idx, grad_i, grad_j, du_axis;
    };
    struct Term {
        int unit;
        Half plus, minus;
    };
    static constexpr Term terms[3] = {
        {0, {2, 2, 1, 1}, {1, 1, 2, 2}},
        {1, {2, 2, 0, 0}, {0, 0, 2, 2}},
        {2, {0, 0, 1, 1}, {1, 1, 0, 0}},
    };
    QField out(g);
    for (std::int64_t i = 0; i < n; ++i) {
        Quaternion acc;
        for (const Term& t : terms) {
            const double cp = cs.a[t.plus.a_idx][i] * cs.da[t.plus.grad_i][t.plus.grad_j][i];
            const double cm = cs.a[t.minus.a_idx][i] * cs.da[t.minus.grad_i][t.minus.grad_j][i];
            acc = acc + e[t.unit] * (du[t.plus.du_axis].q(i) * cp - du[t.minus.du_axis].q(i) * cm);
        }
        out.set(i, acc);
    }
    if (s.s0 != 0.0) {
        const QField tu = apply_T_fields(cs, u);
        for (std::int64_t i = 0; i < n; ++i) out.set(i, out.q(i) - tu.q(i) * (2.0 * s.s0));
    }
    return out;
}

namespace bilinear_detail {

inline void check_space(const QField& u, const Grid& g, const char* who) {
    const double scale = 1.0 + u.data.cwiseAbs().maxCoeff();
    if (g.boundary_kind == BoundaryKind::dirichlet) {
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i)
                    if (g.is_boundary(i, j, k) &&
                        u.q(g.index(i, j, k)).norm() > 1e-10 * scale)
                        throw GridMismatchError(std::string(who) +
                                                ": field does not vanish on the boundary");
    } else {
        if (field_mean(u).norm() > 1e-10 * scale)
            throw GridMismatchError(std::string(who) +
                                    ": field is not mean-zero (RobinType space)");
    }
}

}  // namespace bilinear_detail

/// b_s(u,v) by node-wise quadrature of its defining integrals. Dirichlet
/// grids evaluate the H^1_0 form (no boundary integral); RobinType grids add
/// int a conj(u) v dS over the box faces. Inputs must sit in the space the
/// form is coercive on (zero boundary trace, respectively zero mean).
inline BilinearTerms eval_bilinear(const SpectralParam& s, const QField& u, const QField& v,
                                   const CoefficientSet& cs, const Grid& grid) {
    if (u.grid != grid || v.grid != grid || cs.grid != grid)
        throw GridMismatchError("eval_bilinear: grid mismatch");
    bilinear_detail::check_space(u, grid, "eval_bilinear(u)");
    bilinear_detail::check_space(v, grid, "eval_bilinear(v)");

    const std::int64_t n = grid.node_count();
    const double w3 = grid.h * grid.h * grid.h;
    BilinearTerms out;

    const std::array<QField, 3> du = {field_derivative(u, 0), field_derivative(u, 1),
                                      field_derivative(u, 2)};
    const std::array<QField, 3> dv = {field_derivative(v, 0), field_derivative(v, 1),
                                      field_derivative(v, 2)};

    const auto sum_q = [&](auto&& term) {
        Quaternion acc;
        acc.w = pairwise_sum(0, n, [&](std::size_t i) { return term(i).w; });
        acc.x = pairwise_sum(0, n, [&](std::size_t i) { return term(i).x; });
        acc.y = pairwise_sum(0, n, [&](std::size_t i) { return term(i).y; });
        acc.z = pairwise_sum(0, n, [&](std::size_t i) { return term(i).z; });
        return acc;
    };

    out.grad_grad = sum_q([&](std::size_t i) {
                        Quaternion p;
                        for (int l = 0; l < 3; ++l) {
                            const double a2 = cs.a[l][i] * cs.a[l][i];
                            p = p + du[l].q(i).conj() * dv[l].q(i) * a2;
                        }
                        return p;
                    }) *
                    w3;

    out.grad_coeff = sum_q([&](std::size_t i) {
                         Quaternion p;
                         for (int l = 0; l < 3; ++l) {
                             // 1/2 d_l(a_l^2) = a_l d_l(a_l)
                             const double c = cs.a[l][i] * cs.da[l][l][i];
                             p = p + du[l].q(i).conj() * v.q(i) * c;
                         }
                         return p;
                     }) *
                     w3;

    const QField vect_u = apply_vect_fields(s, cs, u);
    out.vect = sum_q([&](std::size_t i) { return vect_u.q(i).conj() * v.q(i); }) * w3;

    out.mass = sum_q([&](std::size_t i) { return u.q(i).conj() * v.q(i); }) * (w3 * s.abs2);

    if (grid.boundary_kind == BoundaryKind::robin_type) {
        out.boundary = sum_q([&](std::size_t i) {
            const auto ijk = grid.unpack(i);
            const double w = boundary_weight(grid, ijk[0], ijk[1], ijk[2]);
            if (w == 0.0) return Quaternion{};
            return u.q(i).conj() * v.q(i) * (w * cs.a_robin[i]);
        });
    }
    return out;
}

}  // namespace fracop
