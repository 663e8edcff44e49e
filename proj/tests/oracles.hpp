#pragma once

// Test-only oracle machinery, independent of the implementation paths it
// checks.

#include <random>

#include "fracop/assembly.hpp"
#include "fracop/quat_matrix.hpp"

namespace fracop::test {

/// View a dense quaternionic matrix as an AssembledOperator (block form
/// S_c(i,k) = component c of M(i,k)); exercises the same composition algebra
/// the grid assembly uses, against plain quaternion arithmetic.
inline AssembledOperator operator_from_quat_matrix(const QuatMatrix& m, const Grid& g) {
    AssembledOperator op;
    op.grid = g;
    op.closure = Closure::none;
    const int n = m.rows();
    std::array<std::vector<Triplet>, 4> trip;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const Quaternion& q = m(i, k);
            const double comp[4] = {q.w, q.x, q.y, q.z};
            for (int c = 0; c < 4; ++c)
                if (comp[c] != 0.0) trip[c].emplace_back(i, k, comp[c]);
        }
    for (int c = 0; c < 4; ++c) {
        op.block[c].resize(n, n);
        op.block[c].setFromTriplets(trip[c].begin(), trip[c].end());
    }
    return op;
}

inline Eigen::MatrixXd real_block_matrix(const QuatMatrix& m) {
    const int n = m.rows();
    Eigen::MatrixXd r(4 * n, 4 * n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            r.block<4, 4>(4 * i, 4 * k) = left_mult_matrix(m(i, k));
    return r;
}

inline QuatMatrix random_quat_matrix(int n, std::uint64_t seed, double scale = 1.5) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    QuatMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Quaternion{d(rng), d(rng), d(rng), d(rng)};
    return m;
}

}  // namespace fracop::test
