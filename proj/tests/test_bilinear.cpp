#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <random>

#include "fracop/bilinear.hpp"

using namespace fracop;

namespace {

QField sample(const Grid& g, const std::function<Quaternion(double, double, double)>& f) {
    QField u(g);
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const auto c = g.coords(i, j, k);
                u.set(g.index(i, j, k), f(c[0], c[1], c[2]));
            }
    return u;
}

/// Smooth quaternion field vanishing on the unit-box boundary; `variant`
/// picks different harmonics.
QField dirichlet_bump(const Grid& g, int variant = 0) {
    const int kx = 1 + variant, ky = 1 + (variant + 1) % 2;
    return sample(g, [kx, ky](double x, double y, double z) {
        const double s = std::sin(M_PI * x) * std::sin(M_PI * y) * std::sin(M_PI * z);
        const double s2 =
            std::sin(kx * M_PI * x) * std::sin(ky * M_PI * y) * std::sin(M_PI * z);
        return Quaternion{s, 0.6 * s2, -0.4 * s, 0.25 * s2};
    });
}

std::shared_ptr<CoefficientSet> smooth_coeffs(const Grid& g) {
    auto cs = std::make_shared<CoefficientSet>(g);
    set_coefficient(*cs, 0, make_sinusoidal(2.0, 0.3, 1, 2.0, 0.2));
    set_coefficient(*cs, 1, make_affine(1.6, 0.15, 0.0, -0.2));
    set_coefficient(*cs, 2, make_gaussian_decay(1.4, 0.3, 1.5, {0.4, 0.6, 0.5}));
    return cs;
}

}  // namespace

TEST_CASE("constant coefficients, Dirichlet, s = j: b(u,u) = sum ||d_l u||^2 + ||u||^2") {
    const Grid g(9, 9, 9, 1.0 / 8);
    auto cs = std::make_shared<CoefficientSet>(uniform_coefficients(g, 1.0));
    const QField u = dirichlet_bump(g);
    const SpectralParam s = SpectralParam::imaginary(Quaternion::e1(), 1.0);
    const BilinearTerms bt = eval_bilinear(s, u, u, *cs, g);
    CHECK(bt.grad_coeff.norm() < 1e-13);
    CHECK(bt.vect.norm() < 1e-13);
    CHECK(bt.boundary.norm() == 0.0);
    double grads = 0;
    for (int l = 0; l < 3; ++l) grads += std::pow(l2_norm(field_derivative(u, l)), 2);
    CHECK(bt.grad_grad.w == Catch::Approx(grads).epsilon(1e-12));
    CHECK(bt.mass.w == Catch::Approx(std::pow(l2_norm(u), 2)).epsilon(1e-12));
    CHECK(bt.total().w == Catch::Approx(grads + std::pow(l2_norm(u), 2)).epsilon(1e-12));
}

TEST_CASE("space mismatch is rejected") {
    const Grid gd(6, 6, 6, 0.2);
    auto cs = std::make_shared<CoefficientSet>(uniform_coefficients(gd, 1.0));
    const SpectralParam s = SpectralParam::imaginary(Quaternion::e1(), 1.0);
    QField bad(gd);
    for (std::int64_t i = 0; i < gd.node_count(); ++i) bad.set(i, Quaternion{1});
    CHECK_THROWS_AS(eval_bilinear(s, bad, bad, *cs, gd), GridMismatchError);

    const Grid gr(6, 6, 6, 0.2, {0, 0, 0}, BoundaryKind::robin_type);
    auto csr = std::make_shared<CoefficientSet>(uniform_coefficients(gr, 1.0));
    QField c(gr);
    for (std::int64_t i = 0; i < gr.node_count(); ++i) c.set(i, Quaternion{1});
    CHECK_THROWS_AS(eval_bilinear(s, c, c, *csr, gr), GridMismatchError);
    CHECK_NOTHROW(eval_bilinear(s, mean_zero_project(c), mean_zero_project(c), *csr, gr));
}

TEST_CASE("coercivity sample: Re b >= s1^2 ||u||^2 for a passing set") {
    const Grid g(9, 9, 9, 1.0 / 8);
    auto cs = smooth_coeffs(g);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> d(-1, 1);
    const SpectralParam s = SpectralParam::imaginary(Quaternion::e3(), 0.8);
    for (int rep = 0; rep < 20; ++rep) {
        QField u(g);
        for (int k = 1; k < g.nz - 1; ++k)
            for (int j = 1; j < g.ny - 1; ++j)
                for (int i = 1; i < g.nx - 1; ++i)
                    u.set(g.index(i, j, k), Quaternion{d(rng), d(rng), d(rng), d(rng)});
        const double reb = eval_bilinear(s, u, u, *cs, g).total().w;
        CHECK(reb >= s.s1 * s.s1 * std::pow(l2_norm(u), 2) - 1e-12);
    }
}

TEST_CASE("Green compatibility: |b_s(u,v) - <Q_s u, v>| shrinks at second order") {
    const SpectralParam s = SpectralParam::imaginary(Quaternion::e2(), 1.3);
    // The node-wise h^3 rule is first-order for integrands that do not
    // vanish on the boundary, so the compliant test fields vanish there to
    // second (Dirichlet u) or third (Robin) order; the gap then shows the
    // clean second-order decay of the discrete Green identity.
    auto gap_at = [&](int n, BoundaryKind kind) {
        const Grid g(n, n, n, 1.0 / (n - 1), {0, 0, 0}, kind);
        auto cs = smooth_coeffs(g);
        QField u(g), v(g);
        const auto bump2 = [](double x, double y, double z, int kx) {
            const double s = std::sin(kx * M_PI * x) * std::sin(M_PI * y) * std::sin(M_PI * z);
            return s * s;
        };
        if (kind == BoundaryKind::dirichlet) {
            u = sample(g, [&](double x, double y, double z) {
                return Quaternion{bump2(x, y, z, 1), 0.6 * bump2(x, y, z, 2),
                                  -0.4 * bump2(y, x, z, 1), 0.25 * bump2(z, y, x, 1)};
            });
            v = dirichlet_bump(g, 1);
        } else {
            const auto w4 = [](double t) { return std::pow(std::sin(M_PI * t), 4); };
            u = sample(g, [&](double x, double y, double z) {
                const double b = w4(x) * w4(y) * w4(z);
                const double b2 = b * std::cos(M_PI * x);
                return Quaternion{b, 0.5 * b2, -0.3 * b, 0.2 * b + 0.1 * b2};
            });
            v = sample(g, [&](double x, double y, double z) {
                const double b = w4(x) * w4(y) * w4(z);
                return Quaternion{0.4 * b, b, 0.1 * b, -0.6 * b};
            });
            u = mean_zero_project(u);
            v = mean_zero_project(v);
        }
        const Quaternion b = eval_bilinear(s, u, v, *cs, g).total();
        const auto T = assemble_T(cs, g, Closure::none);
        const auto Q = assemble_Q(s, T);
        const Quaternion qv = l2_inner(QField(g, Q.apply(u.data)), v);
        return (b - qv).norm();
    };
    for (const BoundaryKind kind : {BoundaryKind::dirichlet, BoundaryKind::robin_type}) {
        const double g1 = gap_at(9, kind), g2 = gap_at(17, kind);
        INFO("kind " << int(kind) << " gaps " << g1 << " -> " << g2);
        CHECK(g2 < 0.35 * g1);  // observed order >= ~1.5 on one halving
    }
}

TEST_CASE("boundary term quadrature against a separable analytic integral") {
    // a = 1, u = v = 1 on the boundary of the unit box: integral = |dOmega| = 6
    const Grid g(17, 17, 17, 1.0 / 16, {0, 0, 0}, BoundaryKind::robin_type);
    auto cs = std::make_shared<CoefficientSet>(uniform_coefficients(g, 1.0, 1.0));
    QField one(g);
    for (std::int64_t i = 0; i < g.node_count(); ++i) one.set(i, Quaternion{1});
    // mean-zero requirement: evaluate the boundary term directly instead
    double surf = 0;
    for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                surf += boundary_weight(g, i, j, k);
    // node-wise facet weights overcount face closures by O(h): (n/(n-1))^2 per face
    const double facets = 6.0 * std::pow(double(g.nx) / (g.nx - 1), 2);
    CHECK(surf == Catch::Approx(facets).epsilon(1e-12));
}
