#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "fracop/quaternion.hpp"

namespace fracop {

/// Dense quaternionic matrix, row-major. Acts on quaternion column vectors
/// from the left, (M v)_i = sum_k M_ik * v_k, so it is right-linear.
class QuatMatrix {
public:
    QuatMatrix() = default;
    QuatMatrix(int rows, int cols) : rows_(rows), cols_(cols), d_(rows * cols) {}

    static QuatMatrix identity(int n) {
        QuatMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = Quaternion{1};
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Quaternion& operator()(int i, int j) { return d_[i * cols_ + j]; }
    const Quaternion& operator()(int i, int j) const { return d_[i * cols_ + j]; }

    QuatMatrix operator*(const QuatMatrix& o) const {
        QuatMatrix r(rows_, o.cols_);
        for (int i = 0; i < rows_; ++i)
            for (int k = 0; k < cols_; ++k) {
                const Quaternion a = (*this)(i, k);
                for (int j = 0; j < o.cols_; ++j) r(i, j) = r(i, j) + a * o(k, j);
            }
        return r;
    }
    QuatMatrix operator+(const QuatMatrix& o) const {
        QuatMatrix r(rows_, cols_);
        for (size_t i = 0; i < d_.size(); ++i) r.d_[i] = d_[i] + o.d_[i];
        return r;
    }
    QuatMatrix operator-(const QuatMatrix& o) const {
        QuatMatrix r(rows_, cols_);
        for (size_t i = 0; i < d_.size(); ++i) r.d_[i] = d_[i] - o.d_[i];
        return r;
    }
    QuatMatrix operator*(double s) const {
        QuatMatrix r(rows_, cols_);
        for (size_t i = 0; i < d_.size(); ++i) r.d_[i] = d_[i] * s;
        return r;
    }

    std::vector<Quaternion> apply(const std::vector<Quaternion>& v) const {
        std::vector<Quaternion> r(rows_);
        for (int i = 0; i < rows_; ++i) {
            Quaternion acc;
            for (int k = 0; k < cols_; ++k) acc = acc + (*this)(i, k) * v[k];
            r[i] = acc;
        }
        return r;
    }

    double max_abs_diff(const QuatMatrix& o) const {
        double m = 0;
        for (size_t i = 0; i < d_.size(); ++i) m = std::max(m, (d_[i] - o.d_[i]).norm());
        return m;
    }

private:
    int rows_{0}, cols_{0};
    std::vector<Quaternion> d_;
};

/// Complex adjoint of an n x n quaternionic matrix: split every entry as
/// q = alpha + beta e2 with alpha, beta in the plane spanned by {1, e1}
/// (identified with C) and form the 2n x 2n block matrix
/// [[A, B], [-conj(B), conj(A)]]. Multiplicative: chi(MN) = chi(M) chi(N).
inline Eigen::MatrixXcd complex_adjoint(const QuatMatrix& m) {
    using C = std::complex<double>;
    const int n = m.rows();
    Eigen::MatrixXcd r(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Quaternion& q = m(i, j);
            const C a(q.w, q.x), b(q.y, q.z);
            r(i, j) = a;
            r(i, j + n) = b;
            r(i + n, j) = -std::conj(b);
            r(i + n, j + n) = std::conj(a);
        }
    return r;
}

/// Inverse of complex_adjoint. Rejects matrices that lack the symplectic
/// block symmetry beyond `tol` (relative to the largest entry).
inline QuatMatrix adjoint_to_quaternion(const Eigen::MatrixXcd& m, double tol = 1e-10) {
    const int n2 = static_cast<int>(m.rows());
    if (n2 % 2 != 0 || m.cols() != m.rows())
        throw std::invalid_argument("adjoint_to_quaternion: expected even square matrix");
    const int n = n2 / 2;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    QuatMatrix r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::complex<double> a = m(i, j), b = m(i, j + n);
            const double defect = std::max(std::abs(m(i + n, j) + std::conj(b)),
                                           std::abs(m(i + n, j + n) - std::conj(a)));
            if (defect > tol * scale)
                throw std::invalid_argument(
                    "adjoint_to_quaternion: symplectic block symmetry violated");
            r(i, j) = Quaternion{a.real(), a.imag(), b.real(), b.imag()};
        }
    return r;
}

/// Embed a quaternion vector as the first block column of its adjoint,
/// [alpha; -conj(beta)], compatible with chi(M) chi_vec(v) = chi_vec(M v).
inline Eigen::VectorXcd adjoint_vector(const std::vector<Quaternion>& v) {
    const int n = static_cast<int>(v.size());
    Eigen::VectorXcd r(2 * n);
    for (int i = 0; i < n; ++i) {
        r(i) = std::complex<double>(v[i].w, v[i].x);
        r(i + n) = -std::conj(std::complex<double>(v[i].y, v[i].z));
    }
    return r;
}

inline std::vector<Quaternion> adjoint_vector_back(const Eigen::VectorXcd& c) {
    const int n = static_cast<int>(c.size()) / 2;
    std::vector<Quaternion> v(n);
    for (int i = 0; i < n; ++i) {
        const std::complex<double> a = c(i), nb = c(i + n);  // nb = -conj(beta)
        v[i] = Quaternion{a.real(), a.imag(), -nb.real(), nb.imag()};
    }
    return v;
}

}  // namespace fracop
