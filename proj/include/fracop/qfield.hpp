#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "fracop/errors.hpp"
#include "fracop/grid.hpp"
#include "fracop/numeric.hpp"
#include "fracop/quaternion.hpp"

namespace fracop {

/// Quaternion-valued grid function: four real components per node, stored
/// as one flat vector with layout data[4*node + component].
struct QField {
    Grid grid;
    Eigen::VectorXd data;

    QField() = default;
    explicit QField(const Grid& g) : grid(g), data(Eigen::VectorXd::Zero(4 * g.node_count())) {}
    QField(const Grid& g, Eigen::VectorXd values) : grid(g), data(std::move(values)) {
        if (data.size() != 4 * grid.node_count())
            throw GridMismatchError("QField: value vector does not match grid node count");
    }

    Quaternion q(std::int64_t node) const {
        return {data[4 * node], data[4 * node + 1], data[4 * node + 2], data[4 * node + 3]};
    }
    void set(std::int64_t node, const Quaternion& v) {
        data[4 * node] = v.w;
        data[4 * node + 1] = v.x;
        data[4 * node + 2] = v.y;
        data[4 * node + 3] = v.z;
    }
};

/// Left multiplication by a constant quaternion, node-wise: u -> c u.
inline Eigen::VectorXd left_mul(const Quaternion& c, const Eigen::VectorXd& u) {
    const std::int64_t n = u.size() / 4;
    Eigen::VectorXd r(u.size());
    for (std::int64_t i = 0; i < n; ++i) {
        const double w = u[4 * i], x = u[4 * i + 1], y = u[4 * i + 2], z = u[4 * i + 3];
        r[4 * i]     = c.w * w - c.x * x - c.y * y - c.z * z;
        r[4 * i + 1] = c.x * w + c.w * x - c.z * y + c.y * z;
        r[4 * i + 2] = c.y * w + c.z * x + c.w * y - c.x * z;
        r[4 * i + 3] = c.z * w - c.y * x + c.x * y + c.w * z;
    }
    return r;
}

/// Grid-weighted L2 inner product <u,v> = sum_nodes conj(u) v h^3
/// (node-wise midpoint rule). Right-linear in v, conjugate-linear in u.
inline Quaternion l2_inner(const QField& u, const QField& v) {
    if (u.grid != v.grid) throw GridMismatchError("l2_inner: fields live on different grids");
    const std::int64_t n = u.grid.node_count();
    const double w3 = u.grid.h * u.grid.h * u.grid.h;
    Quaternion acc;
    const auto comp = [&](int c) {
        return pairwise_sum(0, static_cast<std::size_t>(n), [&](std::size_t i) {
            const Quaternion p = u.q(i).conj() * v.q(i);
            switch (c) {
                case 0: return p.w;
                case 1: return p.x;
                case 2: return p.y;
                default: return p.z;
            }
        });
    };
    acc.w = comp(0);
    acc.x = comp(1);
    acc.y = comp(2);
    acc.z = comp(3);
    return acc * w3;
}

inline double l2_norm(const QField& u) {
    const double w3 = u.grid.h * u.grid.h * u.grid.h;
    const double s = pairwise_sum(0, static_cast<std::size_t>(u.data.size()),
                                  [&](std::size_t i) { return u.data[i] * u.data[i]; });
    return std::sqrt(s * w3);
}

inline Quaternion field_mean(const QField& u) {
    const std::int64_t n = u.grid.node_count();
    Quaternion m;
    m.w = pairwise_sum(0, n, [&](std::size_t i) { return u.data[4 * i]; }) / double(n);
    m.x = pairwise_sum(0, n, [&](std::size_t i) { return u.data[4 * i + 1]; }) / double(n);
    m.y = pairwise_sum(0, n, [&](std::size_t i) { return u.data[4 * i + 2]; }) / double(n);
    m.z = pairwise_sum(0, n, [&](std::size_t i) { return u.data[4 * i + 3]; }) / double(n);
    return m;
}

/// Projection onto the zero-average subspace (the discrete counterpart of
/// the space where the Robin-type problem is coercive). Idempotent and
/// self-adjoint for the uniform node weights.
inline QField mean_zero_project(const QField& u) {
    if (u.grid.boundary_kind != BoundaryKind::robin_type)
        throw GridMismatchError("mean_zero_project: defined for RobinType grids");
    const Quaternion m = field_mean(u);
    QField r = u;
    const std::int64_t n = u.grid.node_count();
    for (std::int64_t i = 0; i < n; ++i) r.set(i, u.q(i) - m);
    return r;
}

/// Mean-zero projection on the raw component vector, no boundary-kind check;
/// used inside solvers where the space is already fixed.
inline void project_mean_zero_inplace(Eigen::VectorXd& v) {
    const std::int64_t n = v.size() / 4;
    for (int c = 0; c < 4; ++c) {
        const double m =
            pairwise_sum(0, n, [&](std::size_t i) { return v[4 * i + c]; }) / double(n);
        for (std::int64_t i = 0; i < n; ++i) v[4 * i + c] -= m;
    }
}

/// Discrete L^p norm of a real scalar field (one value per node):
/// (sum |f|^p h^3)^(1/p); p = inf gives the node-wise max.
inline double discrete_lp_norm(const Eigen::VectorXd& f, double p, const Grid& g) {
    if (f.size() != g.node_count())
        throw GridMismatchError("discrete_lp_norm: field does not match grid");
    if (std::isinf(p)) return f.cwiseAbs().maxCoeff();
    if (p != 2.0 && p != 3.0)
        throw std::invalid_argument("discrete_lp_norm: p must be 2, 3 or inf");
    const double w3 = g.h * g.h * g.h;
    const double s = pairwise_sum(0, static_cast<std::size_t>(f.size()), [&](std::size_t i) {
        return std::pow(std::abs(f[i]), p);
    });
    return std::pow(s * w3, 1.0 / p);
}

/// Surface quadrature weight of a node: h^2 per boundary facet it lies on
/// (0 for interior nodes).
inline double boundary_weight(const Grid& g, int i, int j, int k) {
    return g.h * g.h * g.face_multiplicity(i, j, k);
}

}  // namespace fracop
