#include "kornlab/shell_field.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace kornlab {

SurfacePointData surface_point_data(const MidSurface& s, Real theta, Real z) {
    return {s.A_theta(theta, z), s.A_z(theta, z),     s.dA_theta_dz(theta, z),
            s.dA_z_dtheta(theta, z), s.kappa_theta(theta, z), s.kappa_z(theta, z)};
}

Mat3 shell_gradient(const SurfacePointData& sp, Real t, const Vec3& u, const Mat3& P,
                    bool simplified) {
    const Real jt = simplified ? 1.0 : 1.0 + t * sp.kappa_theta;
    const Real jz = simplified ? 1.0 : 1.0 + t * sp.kappa_z;
    if (!(jt >= 0.5) || !(jz >= 0.5)) {
        std::ostringstream os;
        os << "normal Jacobian factor below 0.5 at t=" << t << ": 1+t*kappa = (" << jt << ", " << jz
           << ")";
        throw singularity_error(os.str());
    }
    const Real Ath = sp.A_theta, Az = sp.A_z;
    Mat3 G;
    G(0, 0) = P(0, 0);
    G(0, 1) = (P(0, 1) - Ath * sp.kappa_theta * u[1]) / (Ath * jt);
    G(0, 2) = (P(0, 2) - Az * sp.kappa_z * u[2]) / (Az * jz);
    G(1, 0) = P(1, 0);
    G(1, 1) = (Az * P(1, 1) + Az * Ath * sp.kappa_theta * u[0] + sp.dA_theta_dz * u[2]) /
              (Az * Ath * jt);
    G(1, 2) = (Ath * P(1, 2) - sp.dA_z_dtheta * u[2]) / (Az * Ath * jz);
    G(2, 0) = P(2, 0);
    G(2, 1) = (Az * P(2, 1) - sp.dA_theta_dz * u[1]) / (Az * Ath * jt);
    G(2, 2) = (Ath * P(2, 2) + Az * Ath * sp.kappa_z * u[0] + sp.dA_z_dtheta * u[1]) /
              (Az * Ath * jz);
    return G;
}

Mat3 eval_gradient(const ShellField& f, const ThinDomain& d, Real t, Real theta, Real z) {
    return shell_gradient(surface_point_data(d.surface, theta, z), t, f.value(t, theta, z),
                          f.partials(t, theta, z), false);
}

Mat3 eval_simplified_gradient(const ShellField& f, const ThinDomain& d, Real t, Real theta, Real z) {
    return shell_gradient(surface_point_data(d.surface, theta, z), t, f.value(t, theta, z),
                          f.partials(t, theta, z), true);
}

namespace {

// Second-order difference of a vector-valued map along one coordinate,
// centered when the stencil fits inside [lo, hi], one-sided otherwise.
template <class G>
Vec3 fd_partial(const G& g, Real x, Real step, Real lo, Real hi) {
    if (x - step >= lo && x + step <= hi) return (g(x + step) - g(x - step)) / (2 * step);
    if (x + 2 * step <= hi) return (-3 * g(x) + 4 * g(x + step) - g(x + 2 * step)) / (2 * step);
    return (3 * g(x) - 4 * g(x - step) + g(x - 2 * step)) / (2 * step);
}

ShellField fd_field(std::function<Vec3(Real, Real, Real)> value, const ThinDomain& d,
                    GridResolution res) {
    const MidSurface s = d.surface;
    auto g1 = d.g1, g2 = d.g2;
    const Real omega = s.omega;
    auto zlo = s.z_lower, zhi = s.z_upper;
    const int n_th = res.n_theta, n_z = res.n_z, n_t = res.n_t;

    auto partials = [=](Real t, Real th, Real z) {
        const Real z1 = zlo(th), z2 = zhi(th);
        const Real tlo = -g1(th, z), thi = g2(th, z);
        Mat3 P;
        P.col(0) = fd_partial([&](Real q) { return value(q, th, z); }, t, (thi - tlo) / n_t, tlo, thi);
        P.col(1) = fd_partial([&](Real q) { return value(t, q, z); }, th, omega / n_th, 0.0, omega);
        P.col(2) = fd_partial([&](Real q) { return value(t, th, q); }, z, (z2 - z1) / n_z, z1, z2);
        return P;
    };
    return ShellField{std::move(value), std::move(partials)};
}

} // namespace

ShellField rigid_field(const Vec3& axis, const Vec3& center, const ThinDomain& d,
                       GridResolution res) {
    const MidSurface s = d.surface;
    auto value = [s, axis, center](Real t, Real th, Real z) -> Vec3 {
        const Vec3 x = s.point(th, z) + t * s.normal(th, z);
        const Vec3 u_cart = axis.cross(x - center);
        return s.frame(th, z).transpose() * u_cart;
    };
    return fd_field(std::move(value), d, res);
}

ShellField sampled_field(const ShellField& f, const ThinDomain& d, GridResolution res) {
    return fd_field(f.value, d, res);
}

ShellField scale_field(const ShellField& f, Real c) {
    auto value = f.value;
    auto partials = f.partials;
    return ShellField{[value, c](Real t, Real th, Real z) -> Vec3 { return c * value(t, th, z); },
                      [partials, c](Real t, Real th, Real z) -> Mat3 {
                          return c * partials(t, th, z);
                      }};
}

ShellField random_bump_field(const ThinDomain& d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> amp(0.3, 1.0);
    std::uniform_real_distribution<Real> phase(0.0, 2 * M_PI);
    std::uniform_int_distribution<int> freq(1, 2);

    const MidSurface& s = d.surface;
    const Real omega = s.omega;
    const Real z1 = s.z_lower(0), z2 = s.z_upper(0);
    const Real h = d.h;

    // Each component: a * sin(k1*pi*theta/omega + p1) * sin(k2*pi*(z-z1)/(z2-z1) + p2) * (1 + b*t/h)
    struct Term {
        Real a, k1, p1, k2, p2, b;
    };
    std::array<Term, 3> terms;
    for (auto& tm : terms) {
        tm.a = amp(rng);
        tm.k1 = freq(rng) * M_PI / omega;
        tm.p1 = phase(rng);
        tm.k2 = freq(rng) * M_PI / (z2 - z1);
        tm.p2 = phase(rng);
        tm.b = 0.5 * amp(rng);
    }

    auto value = [terms, z1, h](Real t, Real th, Real z) -> Vec3 {
        Vec3 u;
        for (int c = 0; c < 3; ++c) {
            const Term& tm = terms[static_cast<std::size_t>(c)];
            u[c] = tm.a * std::sin(tm.k1 * th + tm.p1) * std::sin(tm.k2 * (z - z1) + tm.p2) *
                   (1 + tm.b * t / h);
        }
        return u;
    };
    auto partials = [terms, z1, h](Real t, Real th, Real z) -> Mat3 {
        Mat3 P;
        for (int c = 0; c < 3; ++c) {
            const Term& tm = terms[static_cast<std::size_t>(c)];
            const Real s1 = std::sin(tm.k1 * th + tm.p1), c1 = std::cos(tm.k1 * th + tm.p1);
            const Real s2 = std::sin(tm.k2 * (z - z1) + tm.p2), c2 = std::cos(tm.k2 * (z - z1) + tm.p2);
            const Real ft = 1 + tm.b * t / h;
            P(c, 0) = tm.a * s1 * s2 * tm.b / h;
            P(c, 1) = tm.a * tm.k1 * c1 * s2 * ft;
            P(c, 2) = tm.a * tm.k2 * s1 * c2 * ft;
        }
        return P;
    };
    return ShellField{std::move(value), std::move(partials)};
}

} // namespace kornlab
