#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kornlab/quadrature.hpp"
#include "kornlab/shell_field.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace kornlab;
namespace kt = kornlab::testing;

namespace {

MidSurface plate11() { return make_surface(SurfaceKind::plate, {{"Lx", 1.0}, {"Ly", 1.0}}); }
MidSurface unit_cylinder() {
    return make_surface(SurfaceKind::cylinder, {{"R", 1.0}, {"length", 1.0}});
}

ThinDomain plate_domain(Real h = 0.01) {
    return make_thin_domain(plate11(), h, ThicknessProfile::constant, 2.0, 1.0);
}
ThinDomain cylinder_domain(Real h = 0.01) {
    return make_thin_domain(unit_cylinder(), h, ThicknessProfile::constant, 2.0, 1.0);
}

// Smooth closed-form test field with analytic partials.
ShellField trig_field() {
    auto value = [](Real t, Real th, Real z) {
        return Vec3(std::sin(th) * std::cos(z) + t, std::cos(2 * th) * z + 0.3 * t * th,
                    std::sin(z + th) + t * t);
    };
    auto partials = [](Real t, Real th, Real z) {
        Mat3 P;
        P.row(0) << 1.0, std::cos(th) * std::cos(z), -std::sin(th) * std::sin(z);
        P.row(1) << 0.3 * th, -2 * std::sin(2 * th) * z + 0.3 * t, std::cos(2 * th);
        P.row(2) << 2 * t, std::cos(z + th), std::cos(z + th);
        return P;
    };
    return ShellField{value, partials};
}

} // namespace

TEST_CASE("strain is the symmetric part") {
    Mat3 skew;
    skew << 0, 1, -2, -1, 0, 3, 2, -3, 0;
    CHECK(strain(skew).norm() == 0.0);
    Mat3 sym;
    sym << 1, 2, 3, 2, 4, 5, 3, 5, 6;
    CHECK((strain(sym) - sym).norm() == 0.0);
    Mat3 m = Mat3::Zero();
    m(0, 1) = 1.0;
    const Mat3 e = strain(m);
    CHECK(e(0, 1) == 0.5);
    CHECK(e(1, 0) == 0.5);
    CHECK(e.diagonal().norm() == 0.0);
    CHECK((strain(strain(m)) - strain(m)).norm() == 0.0); // idempotent
}

TEST_CASE("constant normal displacement on the plate has zero gradient") {
    const ThinDomain d = plate_domain();
    const ShellField f{[](Real, Real, Real) { return Vec3(0, 0, 1); },
                       [](Real, Real, Real) { return Mat3::Zero().eval(); }};
    CHECK(eval_gradient(f, d, 0.003, 0.4, 0.6).norm() == 0.0);
}

TEST_CASE("plate gradient equals the plain partial matrix") {
    const ThinDomain d = plate_domain();
    const ShellField f = trig_field();
    for (Real t : {-0.005, 0.002})
        for (Real th : {0.2, 0.8})
            for (Real z : {0.3, 0.9}) {
                const Mat3 G = eval_gradient(f, d, t, th, z);
                CHECK((G - f.partials(t, th, z)).norm() < 1e-14);
            }
}

TEST_CASE("unit cylinder, pure normal displacement") {
    const ThinDomain d = cylinder_domain();
    const ShellField f{[](Real, Real, Real) { return Vec3(1, 0, 0); },
                       [](Real, Real, Real) { return Mat3::Zero().eval(); }};
    const Real t = 0.004;
    const Mat3 G = eval_gradient(f, d, t, 0.5, 0.5);
    CHECK(G(1, 1) == doctest::Approx(1.0 / (1.0 + t)).epsilon(1e-14));
    CHECK(G(2, 2) == 0.0);
    const Mat3 F = eval_simplified_gradient(f, d, t, 0.5, 0.5);
    CHECK(F(1, 1) == 1.0);
    // At t = 0 the two agree exactly.
    const Mat3 G0 = eval_gradient(f, d, 0.0, 0.5, 0.5);
    const Mat3 F0 = eval_simplified_gradient(f, d, 0.0, 0.5, 0.5);
    CHECK((G0 - F0).norm() == 0.0);
}

TEST_CASE("simplified gradient equals gradient at t = 0 for generic fields") {
    const ThinDomain d = cylinder_domain();
    const ShellField f = trig_field();
    const Mat3 G0 = eval_gradient(f, d, 0.0, 0.7, 0.2);
    const Mat3 F0 = eval_simplified_gradient(f, d, 0.0, 0.7, 0.2);
    CHECK((G0 - F0).norm() == 0.0);
}

TEST_CASE("gradient matches the Cartesian finite-difference Jacobian") {
    const std::vector<std::pair<std::string, SurfaceParams>> kinds = {
        {"plate", {{"Lx", 1.0}, {"Ly", 1.0}}},
        {"cylinder", {{"R", 1.0}, {"length", 1.0}}},
        {"sphere_cap", {{"R", 1.0}, {"polar_min", 0.3}, {"polar_max", 1.2}}},
        {"catenoid", {{"z_min", -0.5}, {"z_max", 0.5}}}};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<Real> u01(0.05, 0.95);
    for (const auto& [kind, params] : kinds) {
        const MidSurface s = make_surface(kind, params);
        const ThinDomain d = make_thin_domain(s, 0.02, ThicknessProfile::constant, 2.0, 1.0);
        const ShellField f = random_bump_field(d, 7);
        for (int q = 0; q < 50; ++q) {
            const Real th = s.omega * u01(rng);
            const Real z1 = s.z_lower(th), z2 = s.z_upper(th);
            const Real z = z1 + (z2 - z1) * u01(rng);
            const Real t = -d.g1(th, z) + (d.g1(th, z) + d.g2(th, z)) * u01(rng);
            const Mat3 A = eval_gradient(f, d, t, th, z);
            const Mat3 B = kt::cartesian_fd_gradient(f, s, t, th, z);
            CHECK((A - B).norm() / A.norm() < 1e-4);
        }
    }
}

TEST_CASE("lp_norm basics on the plate") {
    const Real h = 0.01;
    const ThinDomain d = plate_domain(h);
    const QuadratureGrid g = make_quadrature(d);

    auto one = [](Real, Real, Real) { return 1.0; };
    for (Real p : {1.5, 2.0, 3.0})
        CHECK(lp_norm(g, p, one) == doctest::Approx(std::pow(2 * h, 1.0 / p)).epsilon(1e-12));

    // |sin(pi theta)|_2^2 = 2h * 1/2 = h on the unit patch.
    auto f = [](Real, Real th, Real) { return std::sin(M_PI * th); };
    CHECK(lp_norm(g, 2.0, f) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("volume of the thin plate equals area times thickness to 1e-10") {
    for (ThicknessProfile pr : {ThicknessProfile::constant, ThicknessProfile::tilted}) {
        const ThinDomain d = make_thin_domain(plate11(), 0.01, pr, 2.0, 1.0);
        const QuadratureGrid g = make_quadrature(d);
        const Real vol = lp_power_integral(g, 2.0, [](Real, Real, Real) { return 1.0; });
        Real exact = 0; // integral of (g1+g2) over the unit square; both profiles are theta-linear
        const int n = 4096;
        for (int i = 0; i < n; ++i) {
            const Real th = (i + 0.5) / n;
            exact += (d.g1(th, 0.5) + d.g2(th, 0.5)) / n;
        }
        CHECK(std::abs(vol - exact) / exact < 1e-10);
    }
}

TEST_CASE("cylinder volume: odd Jacobian term cancels") {
    const Real h = 0.01;
    const ThinDomain d = cylinder_domain(h);
    const QuadratureGrid g = make_quadrature(d);
    for (Real p : {1.5, 2.0})
        CHECK(lp_norm(g, p, [](Real, Real, Real) { return 1.0; }) ==
              doctest::Approx(std::pow(2 * h, 1.0 / p)).epsilon(1e-10));
}

TEST_CASE("lp_norm is absolutely homogeneous") {
    const ThinDomain d = cylinder_domain();
    const QuadratureGrid g = make_quadrature(d, {32, 32, 4});
    const ShellField f = trig_field();
    for (Real c : {-3.7, 0.25}) {
        const ShellField fc = scale_field(f, c);
        for (Real p : {1.5, 2.0, 3.0}) {
            const Real n1 = lp_norm(g, p, [&](Real t, Real th, Real z) { return f.value(t, th, z); });
            const Real nc = lp_norm(g, p, [&](Real t, Real th, Real z) { return fc.value(t, th, z); });
            CHECK(nc == doctest::Approx(std::abs(c) * n1).epsilon(1e-12));
        }
    }
}

TEST_CASE("p = 2 matrix norm matches the sum of entry norms") {
    const ThinDomain d = cylinder_domain();
    const QuadratureGrid g = make_quadrature(d, {32, 32, 4});
    const ShellField f = trig_field();
    auto mat = [&](Real t, Real th, Real z) { return eval_gradient(f, d, t, th, z); };
    const Real whole = lp_norm(g, 2.0, mat);
    Real sum_sq = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            sum_sq += std::pow(
                lp_norm(g, 2.0, [&, r, c](Real t, Real th, Real z) { return mat(t, th, z)(r, c); }),
                2.0);
    CHECK(whole * whole == doctest::Approx(sum_sq).epsilon(1e-12));
}

TEST_CASE("pairwise reduction agrees with plain sequential summation") {
    const ThinDomain d = cylinder_domain();
    const QuadratureGrid g = make_quadrature(d, {48, 48, 8});
    const ShellField f = trig_field();
    ArrayX terms(g.cells());
    for (Eigen::Index c = 0; c < g.cells(); ++c)
        terms[c] = g.weight[c] * std::pow(f.value(g.t[c], g.theta[c], g.z[c]).norm(), 2.0);
    Real seq = 0;
    for (Eigen::Index c = 0; c < g.cells(); ++c) seq += terms[c];
    CHECK(std::abs(pairwise_sum(terms) - seq) / seq < 1e-12);
}

TEST_CASE("rigid fields are strain-free up to the differencing order") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    const ThinDomain d = make_thin_domain(
        make_surface(SurfaceKind::cylinder, {{"R", 1.0}, {"length", 0.6}, {"omega", 0.6}}), 0.02,
        ThicknessProfile::constant, 2.0, 1.0);

    for (int rep = 0; rep < 3; ++rep) {
        Vec3 axis(u(rng), u(rng), u(rng));
        axis.normalize();
        const Vec3 center = d.surface.point(0.3, 0.3) + 0.2 * Vec3(u(rng), u(rng), u(rng));

        auto ratio_at = [&](GridResolution res) {
            const ShellField f = rigid_field(axis, center, d, res);
            const QuadratureGrid g = make_quadrature(d, res);
            Real num = 0, den = 0;
            for (Eigen::Index c = 0; c < g.cells(); ++c) {
                const Mat3 G = eval_gradient(f, d, g.t[c], g.theta[c], g.z[c]);
                num += g.weight[c] * strain(G).squaredNorm();
                den += g.weight[c] * G.squaredNorm();
            }
            return std::sqrt(num / den);
        };
        const Real r1 = ratio_at({64, 64, 8});
        const Real r2 = ratio_at({128, 128, 16});
        CHECK(r1 < 1e-5);
        if (r1 > 1e-12) CHECK(r2 < r1 / 3.0);
    }
}

TEST_CASE("rigid field about e3 on the plate has linear components") {
    const ThinDomain d = plate_domain();
    const ShellField f = rigid_field(Vec3(0, 0, 1), Vec3::Zero(), d);
    // u_cart = e3 x (theta, z, t) = (-z, theta, 0) in the plate frame
    for (Real th : {0.2, 0.7})
        for (Real z : {0.1, 0.9}) {
            const Vec3 u = f.value(0.002, th, z);
            CHECK(u[0] == doctest::Approx(0.0));
            CHECK(u[1] == doctest::Approx(-z));
            CHECK(u[2] == doctest::Approx(th));
        }
}

TEST_CASE("zero axis gives the zero field") {
    const ThinDomain d = plate_domain();
    const ShellField f = rigid_field(Vec3::Zero(), Vec3(0.3, 0.3, 0.0), d);
    CHECK(f.value(0.001, 0.5, 0.5).norm() == 0.0);
    CHECK(eval_gradient(f, d, 0.001, 0.5, 0.5).norm() == 0.0);
}

TEST_CASE("simplified-vs-exact gradient: h-weighted comparison bound") {
    // |F - grad u|_p <= 2 c1 k / (1 - c1 k h) * h * |grad u|_p
    const std::vector<std::pair<std::string, SurfaceParams>> kinds = {
        {"cylinder", {{"R", 1.0}, {"length", 1.0}}},
        {"sphere_cap", {{"R", 1.0}, {"polar_min", 0.3}, {"polar_max", 1.2}}},
        {"catenoid", {{"z_min", -0.5}, {"z_max", 0.5}}}};
    for (const auto& [kind, params] : kinds) {
        const MidSurface s = make_surface(kind, params);
        const ThinDomain d = make_thin_domain(s, 0.02, ThicknessProfile::constant, 2.0, 1.0);
        const Real k = domain_params(s, 64).k;
        const Real bound = 2 * d.c1 * k / (1 - d.c1 * k * d.h) * d.h;
        const QuadratureGrid g = make_quadrature(d, {32, 32, 4});
        for (std::uint64_t seed : {1ull, 2ull}) {
            const ShellField f = random_bump_field(d, seed);
            const Real diff = lp_norm(g, 2.0, [&](Real t, Real th, Real z) {
                return (eval_simplified_gradient(f, d, t, th, z) - eval_gradient(f, d, t, th, z))
                    .eval();
            });
            const Real grad =
                lp_norm(g, 2.0, [&](Real t, Real th, Real z) { return eval_gradient(f, d, t, th, z); });
            CHECK(diff <= bound * grad);
        }
    }
    // Flat case: F and grad coincide identically.
    const ThinDomain dp = plate_domain();
    const ShellField f = trig_field();
    const Mat3 diff = eval_simplified_gradient(f, dp, 0.003, 0.4, 0.6) -
                      eval_gradient(f, dp, 0.003, 0.4, 0.6);
    CHECK(diff.norm() == 0.0);
}

TEST_CASE("analytic partials of built-in fields match differences at step 1e-4") {
    const ThinDomain d = cylinder_domain(0.02);
    for (const ShellField& f : {trig_field(), random_bump_field(d, 5)}) {
        for (Real t : {-0.01, 0.007})
            for (Real th : {0.3, 0.8})
                for (Real z : {0.2, 0.6}) {
                    const Mat3 P = f.partials(t, th, z);
                    Mat3 F;
                    const Real s = 1e-4;
                    F.col(0) = (f.value(t + s, th, z) - f.value(t - s, th, z)) / (2 * s);
                    F.col(1) = (f.value(t, th + s, z) - f.value(t, th - s, z)) / (2 * s);
                    F.col(2) = (f.value(t, th, z + s) - f.value(t, th, z - s)) / (2 * s);
                    CHECK((P - F).norm() / P.norm() < 1e-5);
                }
    }
}

TEST_CASE("sampled fields reproduce analytic partials to the grid order") {
    const ThinDomain d = cylinder_domain(0.02);
    const ShellField f = trig_field();
    const ShellField fs = sampled_field(f, d, {128, 128, 8});
    for (Real t : {-0.01, 0.015})
        for (Real th : {0.05, 0.5, 0.98}) {
            const Mat3 P = f.partials(t, th, 0.4);
            const Mat3 Q = fs.partials(t, th, 0.4);
            CHECK((P - Q).norm() / P.norm() < 2e-4);
        }
}

TEST_CASE("gradient evaluation rejects degenerate Jacobian factors") {
    const ThinDomain d = cylinder_domain(0.02);
    const ShellField f = trig_field();
    // 1 + t*kappa < 0.5 at t = -0.6 on the unit cylinder
    CHECK_THROWS_AS(eval_gradient(f, d, -0.6, 0.5, 0.5), singularity_error);
}

TEST_CASE("lp_norm input validation") {
    const ThinDomain d = plate_domain();
    const QuadratureGrid g = make_quadrature(d, {8, 8, 4});
    CHECK_THROWS_AS(lp_norm(g, 1.0, [](Real, Real, Real) { return 1.0; }), usage_error);
    CHECK_THROWS_WITH_AS(
        lp_norm(g, 2.0,
                [](Real t, Real, Real) {
                    return t > 0 ? std::numeric_limits<Real>::quiet_NaN() : 1.0;
                }),
        doctest::Contains("non-finite"), evaluation_error);
}
