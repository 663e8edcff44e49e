#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fracop/quat_matrix.hpp"

using namespace fracop;

namespace {

QuatMatrix random_matrix(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    QuatMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Quaternion{d(rng), d(rng), d(rng), d(rng)};
    return m;
}

}  // namespace

TEST_CASE("complex adjoint of the units") {
    QuatMatrix m(1, 1);
    m(0, 0) = Quaternion::e1();
    Eigen::MatrixXcd a = complex_adjoint(m);
    CHECK(a(0, 0) == std::complex<double>(0, 1));
    CHECK(a(0, 1) == std::complex<double>(0, 0));
    CHECK(a(1, 0) == std::complex<double>(0, 0));
    CHECK(a(1, 1) == std::complex<double>(0, -1));

    m(0, 0) = Quaternion::e2();
    a = complex_adjoint(m);
    CHECK(a(0, 0) == std::complex<double>(0, 0));
    CHECK(a(0, 1) == std::complex<double>(1, 0));
    CHECK(a(1, 0) == std::complex<double>(-1, 0));
    CHECK(a(1, 1) == std::complex<double>(0, 0));
}

TEST_CASE("scalar adjoint determinant is the squared norm") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        QuatMatrix m = random_matrix(1, rng);
        const auto a = complex_adjoint(m);
        const std::complex<double> det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        CHECK(det.imag() == Catch::Approx(0.0).margin(1e-12));
        CHECK(det.real() == Catch::Approx(m(0, 0).norm2()).epsilon(1e-12));
    }
}

TEST_CASE("adjoint is a multiplicative homomorphism") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        const QuatMatrix A = random_matrix(3, rng), B = random_matrix(3, rng);
        const Eigen::MatrixXcd lhs = complex_adjoint(A * B);
        const Eigen::MatrixXcd rhs = complex_adjoint(A) * complex_adjoint(B);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12 * rhs.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("adjoint round trip is the identity") {
    std::mt19937_64 rng(13);
    const QuatMatrix m = random_matrix(4, rng);
    const QuatMatrix back = adjoint_to_quaternion(complex_adjoint(m));
    CHECK(m.max_abs_diff(back) < 1e-12);
}

TEST_CASE("adjoint inverse rejects broken symmetry") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXcd a = complex_adjoint(random_matrix(2, rng));
    a(2, 0) += std::complex<double>(1e-3, 0);
    CHECK_THROWS_AS(adjoint_to_quaternion(a), std::invalid_argument);
}

TEST_CASE("adjoint vector embedding is compatible with mat-vec") {
    std::mt19937_64 rng(21);
    const QuatMatrix m = random_matrix(3, rng);
    std::vector<Quaternion> v(3);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto& q : v) q = Quaternion{d(rng), d(rng), d(rng), d(rng)};
    const Eigen::VectorXcd lhs = complex_adjoint(m) * adjoint_vector(v);
    const Eigen::VectorXcd rhs = adjoint_vector(m.apply(v));
    CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
    // and the vector embedding round-trips
    const auto back = adjoint_vector_back(adjoint_vector(v));
    for (int i = 0; i < 3; ++i) CHECK((back[i] - v[i]).norm() < 1e-15);
}
