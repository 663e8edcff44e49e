#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fracop/frac_power.hpp"
#include "fracop/quat_matrix.hpp"

namespace fracop {

/// Flat 4-per-entry layout of a quaternion vector (same convention as grid
/// fields), so dense matrices can ride the same quadrature machinery.
inline Eigen::VectorXd quat_vec_flat(const std::vector<Quaternion>& v) {
    Eigen::VectorXd r(4 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r[4 * i] = v[i].w;
        r[4 * i + 1] = v[i].x;
        r[4 * i + 2] = v[i].y;
        r[4 * i + 3] = v[i].z;
    }
    return r;
}

inline std::vector<Quaternion> quat_vec_unflat(const Eigen::VectorXd& v) {
    std::vector<Quaternion> r(v.size() / 4);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = Quaternion{v[4 * i], v[4 * i + 1], v[4 * i + 2], v[4 * i + 3]};
    return r;
}

/// AxisOperator view of a dense quaternionic matrix: T-applications by
/// quaternion mat-vec, Q_{jt}-solves through the complex adjoint (one LU of
/// a 2n x 2n complex matrix per t).
inline AxisOperator dense_axis_operator(const QuatMatrix& T) {
    const int n = T.rows();
    auto adjT = std::make_shared<Eigen::MatrixXcd>(complex_adjoint(T));
    auto adjT2 = std::make_shared<Eigen::MatrixXcd>((*adjT) * (*adjT));
    AxisOperator op;
    op.dim = 4 * n;
    op.apply_T = [T](const Eigen::VectorXd& v) {
        return quat_vec_flat(T.apply(quat_vec_unflat(v)));
    };
    op.solve_Q = [adjT2, n](double t, const Eigen::VectorXd& rhs) {
        Eigen::MatrixXcd Q =
            *adjT2 + t * t * Eigen::MatrixXcd::Identity(2 * n, 2 * n);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Q);
        const Eigen::VectorXcd sol = lu.solve(adjoint_vector(quat_vec_unflat(rhs)));
        return quat_vec_flat(adjoint_vector_back(sol));
    };
    return op;
}

/// Random quaternionic matrix with S-spectrum in the open right half-space:
/// a diagonal of right-half-plane eigenvalue pairs plus a perturbation small
/// against the spectral margin.
inline QuatMatrix random_right_spectrum_matrix(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> re(0.8, 3.0), im(0.3, 2.2), pert(-1.0, 1.0);
    for (int attempt = 0; attempt < 32; ++attempt) {
        QuatMatrix m(n, n);
        double min_re = 1e30;
        for (int i = 0; i < n; ++i) {
            const double xr = re(rng), xi = im(rng);
            m(i, i) = Quaternion{xr, xi, 0, 0};
            min_re = std::min(min_re, xr);
        }
        const double eps = 0.08 * min_re / std::max(1, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Quaternion p{pert(rng), pert(rng), pert(rng), pert(rng)};
                m(i, j) = m(i, j) + p * eps;
            }
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(complex_adjoint(m), false);
        if (es.info() == Eigen::Success && es.eigenvalues().real().minCoeff() > 0.05)
            return m;
    }
    throw std::runtime_error("random_right_spectrum_matrix: could not place spectrum");
}

struct MatrixOracleReport {
    int n{0};
    std::uint64_t seed{0};
    double alpha{0};
    double rel_diff{0};      // quadrature vs adjoint eigendecomposition
    double oracle_cond{0};   // condition number of the eigenvector matrix
    double quad_est_error{0};
};

/// Independent verification of the Balakrishnan quadrature on dense
/// matrices: the same P_alpha through the complex-adjoint eigendecomposition
/// and the principal power of each eigenvalue. Comparison happens in the
/// adjoint domain on a handful of random vectors.
inline MatrixOracleReport matrix_oracle(int n, std::uint64_t seed, double alpha,
                                        int n_nodes = 800, double trunc = 30.0,
                                        const QuatMatrix* given = nullptr) {
    MatrixOracleReport rep;
    rep.n = n;
    rep.seed = seed;
    rep.alpha = alpha;
    const QuatMatrix T = given ? *given : random_right_spectrum_matrix(n, seed);

    const Eigen::MatrixXcd A = complex_adjoint(T);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("matrix_oracle: eigendecomposition failed");
    const Eigen::MatrixXcd V = es.eigenvectors();
    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V);
        rep.oracle_cond =
            svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    }
    Eigen::VectorXcd lam = es.eigenvalues();
    Eigen::VectorXcd lam_pow(lam.size());
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i).real() <= 0 && std::abs(lam(i).imag()) < 1e-14)
            throw BranchCutError("matrix_oracle: eigenvalue on the branch cut");
        lam_pow(i) = std::pow(lam(i), std::complex<double>(alpha, 0.0));
    }
    const Eigen::MatrixXcd P_adj =
        V * lam_pow.asDiagonal() * Eigen::PartialPivLU<Eigen::MatrixXcd>(V).solve(
                                       Eigen::MatrixXcd::Identity(2 * n, 2 * n));

    QuadratureSpec spec;
    spec.alpha = alpha;
    spec.n_nodes = n_nodes;
    spec.trunc = trunc;
    const AxisOperator op = dense_axis_operator(T);

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0, 1);
    rep.rel_diff = 0;
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<Quaternion> v(n);
        for (int i = 0; i < n; ++i) v[i] = Quaternion{gauss(rng), gauss(rng), gauss(rng), gauss(rng)};
        const FracPowerReport fr = frac_power_apply(spec, quat_vec_flat(v), op);
        rep.quad_est_error = std::max(rep.quad_est_error, fr.est_error);
        const Eigen::VectorXcd quad_adj = adjoint_vector(quat_vec_unflat(fr.result));
        const Eigen::VectorXcd oracle_adj = P_adj * adjoint_vector(v);
        rep.rel_diff = std::max(
            rep.rel_diff, (quad_adj - oracle_adj).norm() / std::max(oracle_adj.norm(), 1e-300));
    }
    return rep;
}

}  // namespace fracop
