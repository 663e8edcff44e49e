#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracop/errors.hpp"
#include "fracop/grid.hpp"

namespace fracop {

/// Scalar coefficient fields a_1, a_2, a_3 of the vector operator, their
/// nine products' ingredients d(a_j)/dx_i, and the boundary data of the two
/// Robin-flavoured problems.
struct CoefficientSet {
    Grid grid;
    std::array<Eigen::VectorXd, 3> a;                   // a_l at every node
    std::array<std::array<Eigen::VectorXd, 3>, 3> da;   // da[i][j] = d(a_j)/dx_i
    Eigen::VectorXd a_robin;                            // a : boundary data, read on boundary nodes
    Eigen::VectorXd b_phys;                             // b : physical Robin data (size 0 = absent)
    std::optional<double> mu;

    explicit CoefficientSet(const Grid& g) : grid(g) {
        const auto n = g.node_count();
        for (int l = 0; l < 3; ++l) {
            a[l] = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < 3; ++i) da[i][l] = Eigen::VectorXd::Zero(n);
        }
        a_robin = Eigen::VectorXd::Zero(n);
    }

    bool has_b_phys() const { return b_phys.size() == grid.node_count(); }

    void check_finite() const {
        for (int l = 0; l < 3; ++l) {
            if (!a[l].allFinite()) throw std::invalid_argument("CoefficientSet: non-finite a_l");
            for (int i = 0; i < 3; ++i)
                if (!da[i][l].allFinite())
                    throw std::invalid_argument("CoefficientSet: non-finite gradient field");
        }
        if (!a_robin.allFinite()) throw std::invalid_argument("CoefficientSet: non-finite a");
    }
};

/// A scalar function of space with analytic gradient; the built-in
/// coefficient shapes all provide exact derivatives so sup-norm constants
/// are not polluted by differencing error.
struct ScalarFunction {
    std::function<double(double, double, double)> value;
    std::array<std::function<double(double, double, double)>, 3> grad;
};

inline ScalarFunction make_constant(double c) {
    ScalarFunction f;
    f.value = [c](double, double, double) { return c; };
    for (int i = 0; i < 3; ++i) f.grad[i] = [](double, double, double) { return 0.0; };
    return f;
}

/// c0 + cx*x + cy*y + cz*z
inline ScalarFunction make_affine(double c0, double cx, double cy, double cz) {
    ScalarFunction f;
    f.value = [=](double x, double y, double z) { return c0 + cx * x + cy * y + cz * z; };
    f.grad[0] = [cx](double, double, double) { return cx; };
    f.grad[1] = [cy](double, double, double) { return cy; };
    f.grad[2] = [cz](double, double, double) { return cz; };
    return f;
}

/// base + amp*sin(freq*x_axis + phase)
inline ScalarFunction make_sinusoidal(double base, double amp, int axis, double freq,
                                      double phase) {
    ScalarFunction f;
    f.value = [=](double x, double y, double z) {
        const double c = axis == 0 ? x : (axis == 1 ? y : z);
        return base + amp * std::sin(freq * c + phase);
    };
    for (int i = 0; i < 3; ++i) {
        if (i == axis)
            f.grad[i] = [=](double x, double y, double z) {
                const double c = axis == 0 ? x : (axis == 1 ? y : z);
                return amp * freq * std::cos(freq * c + phase);
            };
        else
            f.grad[i] = [](double, double, double) { return 0.0; };
    }
    return f;
}

/// base + amp*exp(-rate*|x - x0|^2); the decaying products a_i da_j make the
/// truncated-box stand-in for unbounded domains meaningful.
inline ScalarFunction make_gaussian_decay(double base, double amp, double rate,
                                          std::array<double, 3> x0) {
    ScalarFunction f;
    f.value = [=](double x, double y, double z) {
        const double dx = x - x0[0], dy = y - x0[1], dz = z - x0[2];
        return base + amp * std::exp(-rate * (dx * dx + dy * dy + dz * dz));
    };
    for (int i = 0; i < 3; ++i)
        f.grad[i] = [=](double x, double y, double z) {
            const double dx = x - x0[0], dy = y - x0[1], dz = z - x0[2];
            const double e = std::exp(-rate * (dx * dx + dy * dy + dz * dz));
            const double d = i == 0 ? dx : (i == 1 ? dy : dz);
            return amp * e * (-2.0 * rate * d);
        };
    return f;
}

inline Eigen::VectorXd sample_on_grid(const ScalarFunction& f, const Grid& g) {
    Eigen::VectorXd v(g.node_count());
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const auto c = g.coords(i, j, k);
                v[g.index(i, j, k)] = f.value(c[0], c[1], c[2]);
            }
    return v;
}

/// Fill coefficient slot l (0..2) from an analytic function, gradients
/// included.
inline void set_coefficient(CoefficientSet& cs, int l, const ScalarFunction& f) {
    cs.a[l] = sample_on_grid(f, cs.grid);
    for (int i = 0; i < 3; ++i) {
        Eigen::VectorXd gi(cs.grid.node_count());
        for (int k = 0; k < cs.grid.nz; ++k)
            for (int j = 0; j < cs.grid.ny; ++j)
                for (int ii = 0; ii < cs.grid.nx; ++ii) {
                    const auto c = cs.grid.coords(ii, j, k);
                    gi[cs.grid.index(ii, j, k)] = f.grad[i](c[0], c[1], c[2]);
                }
        cs.da[i][l] = gi;
    }
}

/// Convenience: all three coefficients identical.
inline CoefficientSet uniform_coefficients(const Grid& g, double value,
                                           double robin_a = 0.0) {
    CoefficientSet cs(g);
    for (int l = 0; l < 3; ++l) set_coefficient(cs, l, make_constant(value));
    cs.a_robin = Eigen::VectorXd::Constant(g.node_count(), robin_a);
    return cs;
}

/// Second-order finite-difference gradients for coefficients loaded from
/// files (no analytic form available). Central in the interior, one-sided
/// second order at the box faces.
inline std::array<Eigen::VectorXd, 3> numeric_gradients(const Eigen::VectorXd& f,
                                                        const Grid& g) {
    std::array<Eigen::VectorXd, 3> out;
    for (int axis = 0; axis < 3; ++axis) {
        out[axis] = Eigen::VectorXd::Zero(g.node_count());
        const std::array<int, 3> step = {axis == 0, axis == 1, axis == 2};
        for (int k = 0; k < g.nz; ++k)
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const auto at = [&](int d) {
                        return f[g.index(i + d * step[0], j + d * step[1], k + d * step[2])];
                    };
                    const int side = g.exit_side(i, j, k, axis);
                    double v;
                    if (side == 0)
                        v = (at(1) - at(-1)) / (2 * g.h);
                    else if (side < 0)
                        v = (-3 * at(0) + 4 * at(1) - at(2)) / (2 * g.h);
                    else
                        v = (3 * at(0) - 4 * at(-1) + at(-2)) / (2 * g.h);
                    out[axis][g.index(i, j, k)] = v;
                }
    }
    return out;
}

}  // namespace fracop
