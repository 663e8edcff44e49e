#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "fracop/coefficients.hpp"
#include "fracop/field_io.hpp"
#include "fracop/qfield.hpp"

using namespace fracop;

namespace {

QField random_field(const Grid& g, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-scale, scale);
    QField u(g);
    for (std::int64_t i = 0; i < u.data.size(); ++i) u.data[i] = d(rng);
    return u;
}

/// Unit-total-measure grid: N h^3 = 1 (node-wise midpoint view of a unit
/// volume), so constants integrate exactly to their value.
Grid unit_measure_grid(int n, BoundaryKind kind = BoundaryKind::dirichlet) {
    const double h = 1.0 / std::cbrt(double(n) * n * n);
    return Grid(n, n, n, h, {0, 0, 0}, kind);
}

}  // namespace

TEST_CASE("grid validation and indexing") {
    CHECK_THROWS_AS(Grid(2, 5, 5, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Grid(5, 5, 5, -0.1), std::invalid_argument);
    const Grid g(4, 5, 6, 0.25, {1, 2, 3});
    CHECK(g.node_count() == 120);
    const auto ijk = g.unpack(g.index(3, 2, 4));
    CHECK(ijk[0] == 3);
    CHECK(ijk[1] == 2);
    CHECK(ijk[2] == 4);
    CHECK(g.coords(1, 0, 2)[0] == Catch::Approx(1.25));
    CHECK(g.is_boundary(0, 2, 2));
    CHECK_FALSE(g.is_boundary(1, 2, 2));
    // dominant-facet convention at a corner: lowest axis wins
    const auto nrm = g.dominant_normal(0, 0, 0);
    CHECK(nrm[0] == 0);
    CHECK(nrm[1] == -1);
    CHECK(g.face_multiplicity(0, 0, 0) == 3);
    CHECK(g.face_multiplicity(0, 2, 2) == 1);
}

TEST_CASE("l2_inner on constants and conjugation") {
    const Grid g = unit_measure_grid(6);
    QField ones(g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) ones.set(i, Quaternion{1});
    const Quaternion n2 = l2_inner(ones, ones);
    CHECK(n2.w == Catch::Approx(1.0).epsilon(1e-13));  // sum h^3 = 1
    CHECK(std::abs(n2.x) + std::abs(n2.y) + std::abs(n2.z) < 1e-15);

    // u = e1 w, v = w with w real: <u,v> = -e1 ||w||^2
    QField w = random_field(g, 3);
    for (std::int64_t i = 0; i < g.node_count(); ++i) w.set(i, Quaternion{w.q(i).w});
    QField e1w(g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) e1w.set(i, Quaternion::e1() * w.q(i));
    const Quaternion inner = l2_inner(e1w, w);
    const double nw2 = std::pow(l2_norm(w), 2);
    CHECK(inner.w == Catch::Approx(0.0).margin(1e-14));
    CHECK(inner.x == Catch::Approx(-nw2).epsilon(1e-12));

    const QField u = random_field(g, 4);
    const Quaternion uu = l2_inner(u, u);
    CHECK(uu.w >= 0.0);
    CHECK(std::abs(uu.x) + std::abs(uu.y) + std::abs(uu.z) < 1e-13 * uu.w);
}

TEST_CASE("l2_inner is conjugate-symmetric and right-linear in v") {
    const Grid g = unit_measure_grid(5);
    const QField u = random_field(g, 11), v = random_field(g, 12);
    const Quaternion a = l2_inner(u, v), b = l2_inner(v, u);
    CHECK((a - b.conj()).norm() < 1e-13);

    const Quaternion lam{0.3, -1.2, 0.7, 0.4};
    QField vlam(g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) vlam.set(i, v.q(i) * lam);
    CHECK((l2_inner(u, vlam) - a * lam).norm() < 1e-12 * std::max(1.0, a.norm()));

    const Grid g2 = unit_measure_grid(4);
    CHECK_THROWS_AS(l2_inner(u, random_field(g2, 1)), GridMismatchError);
}

TEST_CASE("mean_zero_project") {
    const Grid g(6, 6, 6, 0.2, {0, 0, 0}, BoundaryKind::robin_type);
    QField c(g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) c.set(i, Quaternion{2, -1, 0.5, 3});
    const QField pc = mean_zero_project(c);
    CHECK(pc.data.cwiseAbs().maxCoeff() < 1e-14);

    const QField u = random_field(g, 17);
    const QField pu = mean_zero_project(u);
    CHECK(field_mean(pu).norm() < 1e-14);
    const QField ppu = mean_zero_project(pu);
    for (std::int64_t i = 0; i < u.data.size(); ++i)
        CHECK(std::abs(ppu.data[i] - pu.data[i]) < 1e-14);

    // u(x) = x1 on a box symmetric about the origin is already mean-zero
    const Grid gs(7, 7, 7, 0.5, {-1.5, -1.5, -1.5}, BoundaryKind::robin_type);
    QField x1(gs);
    for (int k = 0; k < 7; ++k)
        for (int j = 0; j < 7; ++j)
            for (int i = 0; i < 7; ++i)
                x1.set(gs.index(i, j, k), Quaternion{gs.coords(i, j, k)[0]});
    const QField px1 = mean_zero_project(x1);
    for (std::int64_t i = 0; i < x1.data.size(); ++i)
        CHECK(std::abs(px1.data[i] - x1.data[i]) < 1e-14);

    // self-adjointness of the projector in Re l2_inner
    const QField a = random_field(gs, 19), b = random_field(gs, 23);
    CHECK(l2_inner(mean_zero_project(a), b).w ==
          Catch::Approx(l2_inner(a, mean_zero_project(b)).w).margin(1e-12));

    const Grid gd(5, 5, 5, 0.2);
    CHECK_THROWS_AS(mean_zero_project(random_field(gd, 29)), GridMismatchError);
}

TEST_CASE("discrete Lp norms") {
    const Grid g = unit_measure_grid(6);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.node_count());
    CHECK(discrete_lp_norm(ones, 3.0, g) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(discrete_lp_norm(4.5 * ones, INFINITY, g) == Catch::Approx(4.5));

    Eigen::VectorXd half = ones;
    for (std::int64_t i = 0; i < g.node_count(); ++i) half[i] = (i % 2 == 0) ? 1.0 : 0.0;
    const double expect = std::pow(double((g.node_count() + 1) / 2) / g.node_count(), 1.0 / 3.0);
    CHECK(discrete_lp_norm(half, 3.0, g) == Catch::Approx(expect).epsilon(1e-12));

    // ||f||_2^2 = Re<f,f> for real fields
    QField f(g);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-1, 1);
    Eigen::VectorXd fr(g.node_count());
    for (std::int64_t i = 0; i < g.node_count(); ++i) {
        fr[i] = d(rng);
        f.set(i, Quaternion{fr[i]});
    }
    CHECK(std::pow(discrete_lp_norm(fr, 2.0, g), 2) ==
          Catch::Approx(l2_inner(f, f).w).epsilon(1e-12));
}

TEST_CASE("field io round trip is bitwise") {
    const Grid g(4, 3, 5, 0.325, {0.1, -0.2, 0.7});
    const QField u = random_field(g, 37, 3.0);
    const std::string path = "fracop_test_field.csv";
    save_qfield(u, path);
    const QField back = load_qfield(path);
    REQUIRE(back.grid.nx == g.nx);
    REQUIRE(back.data.size() == u.data.size());
    for (std::int64_t i = 0; i < u.data.size(); ++i) CHECK(back.data[i] == u.data[i]);
    std::filesystem::remove(path);
}

TEST_CASE("field io rejects malformed input") {
    const std::string path = "fracop_test_bad.csv";
    {
        std::ofstream os(path);
        os << "QFIELD,0,3,3,0.1,0,0,0\n";
    }
    CHECK_THROWS_AS(load_qfield(path), IoError);
    {
        std::ofstream os(path);
        os << "QFIELD,3,3,3,0.1,0,0,0\n";
        for (int n = 0; n < 27; ++n)
            os << n % 3 << "," << (n / 3) % 3 << "," << n / 9 << ",1,0,0,"
               << (n == 5 ? "nan" : "0") << "\n";
    }
    try {
        load_qfield(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("(2,1,0)") != std::string::npos);  // node index named
    }
    std::filesystem::remove(path);
}

TEST_CASE("coefficient builtins carry exact gradients") {
    const Grid g(5, 5, 5, 0.25);
    CoefficientSet cs(g);
    set_coefficient(cs, 0, make_sinusoidal(2.0, 0.5, 1, 3.0, 0.2));
    set_coefficient(cs, 1, make_affine(1.0, 0.1, -0.2, 0.3));
    set_coefficient(cs, 2, make_gaussian_decay(1.0, 0.5, 2.0, {0.5, 0.5, 0.5}));
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const auto c = g.coords(i, j, k);
                const auto id = g.index(i, j, k);
                CHECK(cs.a[0][id] == Catch::Approx(2.0 + 0.5 * std::sin(3.0 * c[1] + 0.2)));
                CHECK(cs.da[1][0][id] ==
                      Catch::Approx(1.5 * std::cos(3.0 * c[1] + 0.2)).margin(1e-14));
                CHECK(cs.da[0][0][id] == 0.0);
                CHECK(cs.da[2][1][id] == Catch::Approx(0.3));
            }
    // numeric gradients converge to the analytic ones at second order
    double err_coarse = 0, err_fine = 0;
    {
        const auto num = numeric_gradients(cs.a[0], g);
        for (std::int64_t i = 0; i < g.node_count(); ++i)
            err_coarse = std::max(err_coarse, std::abs(num[1][i] - cs.da[1][0][i]));
    }
    {
        const Grid gf(9, 9, 9, 0.125);
        CoefficientSet cf(gf);
        set_coefficient(cf, 0, make_sinusoidal(2.0, 0.5, 1, 3.0, 0.2));
        const auto num = numeric_gradients(cf.a[0], gf);
        for (std::int64_t i = 0; i < gf.node_count(); ++i)
            err_fine = std::max(err_fine, std::abs(num[1][i] - cf.da[1][0][i]));
    }
    CHECK(err_fine < 0.35 * err_coarse);
}

TEST_CASE("coefficient file round trip") {
    const Grid g(4, 4, 4, 0.3);
    CoefficientSet cs(g);
    set_coefficient(cs, 0, make_sinusoidal(1.0, 0.25, 0, 2.0, 0.0));
    const std::string path = "fracop_test_coeff.csv";
    save_coeff_field(cs.a[0], g, path);
    const Eigen::VectorXd back = load_coeff_field(path, g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) CHECK(back[i] == cs.a[0][i]);
    std::filesystem::remove(path);
}
