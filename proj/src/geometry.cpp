#include "kornlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kornlab {

namespace {

Real require_param(const SurfaceParams& params, const char* name, const char* kind) {
    auto it = params.find(name);
    if (it == params.end()) {
        std::ostringstream os;
        os << "surface kind '" << kind << "' requires parameter '" << name << "'";
        throw geometry_error(os.str());
    }
    return it->second;
}

Real optional_param(const SurfaceParams& params, const char* name, Real fallback) {
    auto it = params.find(name);
    return it == params.end() ? fallback : it->second;
}

void require_positive(Real value, const char* name, const char* kind) {
    if (!(value > 0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << "surface kind '" << kind << "': parameter '" << name << "' must be positive and finite, got "
           << value;
        throw geometry_error(os.str());
    }
}

std::function<Real(Real, Real)> constant2(Real c) {
    return [c](Real, Real) { return c; };
}

} // namespace

const char* to_string(SurfaceKind kind) {
    switch (kind) {
    case SurfaceKind::plate: return "plate";
    case SurfaceKind::cylinder: return "cylinder";
    case SurfaceKind::sphere_cap: return "sphere_cap";
    case SurfaceKind::catenoid: return "catenoid";
    }
    return "?";
}

SurfaceKind surface_kind_from_string(const std::string& name) {
    if (name == "plate") return SurfaceKind::plate;
    if (name == "cylinder") return SurfaceKind::cylinder;
    if (name == "sphere_cap") return SurfaceKind::sphere_cap;
    if (name == "catenoid") return SurfaceKind::catenoid;
    throw geometry_error("unknown surface kind '" + name + "'");
}

Mat3 MidSurface::frame(Real theta, Real z) const {
    Mat3 Q;
    Q.col(0) = normal(theta, z);
    Q.col(1) = e_theta(theta, z);
    Q.col(2) = e_z(theta, z);
    return Q;
}

MidSurface make_surface(SurfaceKind kind, const SurfaceParams& params) {
    MidSurface s;
    s.kind = kind;
    s.params = params;

    switch (kind) {
    case SurfaceKind::plate: {
        const Real Lx = require_param(params, "Lx", "plate");
        const Real Ly = require_param(params, "Ly", "plate");
        require_positive(Lx, "Lx", "plate");
        require_positive(Ly, "Ly", "plate");
        s.omega = Lx;
        s.z_lower = [](Real) { return 0.0; };
        s.z_upper = [Ly](Real) { return Ly; };
        s.point = [](Real th, Real z) { return Vec3(th, z, 0.0); };
        s.d_point_dtheta = [](Real, Real) { return Vec3(1, 0, 0); };
        s.d_point_dz = [](Real, Real) { return Vec3(0, 1, 0); };
        s.normal = [](Real, Real) { return Vec3(0, 0, 1); };
        s.A_theta = constant2(1.0);
        s.A_z = constant2(1.0);
        s.kappa_theta = constant2(0.0);
        s.kappa_z = constant2(0.0);
        s.dA_theta_dtheta = s.dA_theta_dz = s.dA_z_dtheta = s.dA_z_dz = constant2(0.0);
        break;
    }
    case SurfaceKind::cylinder: {
        const Real R = require_param(params, "R", "cylinder");
        const Real length = require_param(params, "length", "cylinder");
        const Real omega = optional_param(params, "omega", 1.0);
        require_positive(R, "R", "cylinder");
        require_positive(length, "length", "cylinder");
        require_positive(omega, "omega", "cylinder");
        s.omega = omega;
        s.z_lower = [](Real) { return 0.0; };
        s.z_upper = [length](Real) { return length; };
        s.point = [R](Real th, Real z) { return Vec3(R * std::cos(th), R * std::sin(th), z); };
        s.d_point_dtheta = [R](Real th, Real) { return Vec3(-R * std::sin(th), R * std::cos(th), 0.0); };
        s.d_point_dz = [](Real, Real) { return Vec3(0, 0, 1); };
        // Radial normal: dn/dtheta = (1/R) * A_theta * e_theta, so kappa_theta = 1/R > 0.
        s.normal = [](Real th, Real) { return Vec3(std::cos(th), std::sin(th), 0.0); };
        s.A_theta = constant2(R);
        s.A_z = constant2(1.0);
        s.kappa_theta = constant2(1.0 / R);
        s.kappa_z = constant2(0.0);
        s.dA_theta_dtheta = s.dA_theta_dz = s.dA_z_dtheta = s.dA_z_dz = constant2(0.0);
        break;
    }
    case SurfaceKind::sphere_cap: {
        const Real R = require_param(params, "R", "sphere_cap");
        const Real polar_min = require_param(params, "polar_min", "sphere_cap");
        const Real polar_max = require_param(params, "polar_max", "sphere_cap");
        const Real omega = optional_param(params, "omega", 1.0);
        require_positive(R, "R", "sphere_cap");
        require_positive(omega, "omega", "sphere_cap");
        if (!(polar_min > 0) || !(polar_max > polar_min) || !(polar_max < M_PI * R)) {
            std::ostringstream os;
            os << "surface kind 'sphere_cap': need 0 < polar_min < polar_max < pi*R, got polar_min="
               << polar_min << ", polar_max=" << polar_max << ", R=" << R;
            throw geometry_error(os.str());
        }
        s.omega = omega;
        s.z_lower = [polar_min](Real) { return polar_min; };
        s.z_upper = [polar_max](Real) { return polar_max; };
        // z is the polar arc length from the pole; the polar angle is z/R.
        s.point = [R](Real th, Real z) {
            const Real phi = z / R;
            return Vec3(R * std::sin(phi) * std::cos(th), R * std::sin(phi) * std::sin(th), R * std::cos(phi));
        };
        s.d_point_dtheta = [R](Real th, Real z) {
            const Real phi = z / R;
            return Vec3(-R * std::sin(phi) * std::sin(th), R * std::sin(phi) * std::cos(th), 0.0);
        };
        s.d_point_dz = [R](Real th, Real z) {
            const Real phi = z / R;
            return Vec3(std::cos(phi) * std::cos(th), std::cos(phi) * std::sin(th), -std::sin(phi));
        };
        s.normal = [R](Real th, Real z) {
            const Real phi = z / R;
            return Vec3(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi));
        };
        s.A_theta = [R](Real, Real z) { return R * std::sin(z / R); };
        s.A_z = constant2(1.0);
        s.kappa_theta = constant2(1.0 / R);
        s.kappa_z = constant2(1.0 / R);
        s.dA_theta_dtheta = constant2(0.0);
        s.dA_theta_dz = [R](Real, Real z) { return std::cos(z / R); };
        s.dA_z_dtheta = s.dA_z_dz = constant2(0.0);
        break;
    }
    case SurfaceKind::catenoid: {
        const Real z_min = require_param(params, "z_min", "catenoid");
        const Real z_max = require_param(params, "z_max", "catenoid");
        const Real omega = optional_param(params, "omega", 1.0);
        require_positive(omega, "omega", "catenoid");
        if (!(z_max > z_min) || !std::isfinite(z_min) || !std::isfinite(z_max)) {
            std::ostringstream os;
            os << "surface kind 'catenoid': need finite z_min < z_max, got z_min=" << z_min
               << ", z_max=" << z_max;
            throw geometry_error(os.str());
        }
        s.omega = omega;
        s.z_lower = [z_min](Real) { return z_min; };
        s.z_upper = [z_max](Real) { return z_max; };
        s.point = [](Real th, Real z) {
            return Vec3(std::cosh(z) * std::cos(th), std::cosh(z) * std::sin(th), z);
        };
        s.d_point_dtheta = [](Real th, Real z) {
            return Vec3(-std::cosh(z) * std::sin(th), std::cosh(z) * std::cos(th), 0.0);
        };
        s.d_point_dz = [](Real th, Real z) {
            return Vec3(std::sinh(z) * std::cos(th), std::sinh(z) * std::sin(th), 1.0);
        };
        s.normal = [](Real th, Real z) {
            const Real c = std::cosh(z);
            return Vec3(std::cos(th) / c, std::sin(th) / c, -std::sinh(z) / c);
        };
        s.A_theta = [](Real, Real z) { return std::cosh(z); };
        s.A_z = [](Real, Real z) { return std::cosh(z); };
        // Minimal surface: the two principal curvatures are opposite.
        s.kappa_theta = [](Real, Real z) { const Real c = std::cosh(z); return 1.0 / (c * c); };
        s.kappa_z = [](Real, Real z) { const Real c = std::cosh(z); return -1.0 / (c * c); };
        s.dA_theta_dtheta = constant2(0.0);
        s.dA_theta_dz = [](Real, Real z) { return std::sinh(z); };
        s.dA_z_dtheta = constant2(0.0);
        s.dA_z_dz = [](Real, Real z) { return std::sinh(z); };
        break;
    }
    }
    return s;
}

MidSurface make_surface(const std::string& kind, const SurfaceParams& params) {
    return make_surface(surface_kind_from_string(kind), params);
}

namespace {

void check_finite(Real v, Real theta, Real z, const char* what) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite " << what << " at (theta=" << theta << ", z=" << z << ")";
        throw geometry_error(os.str());
    }
}

// Accumulates |f|, |grad f| and |hess f| grid maxima of one scalar surface
// function, with central differences at the given steps.
struct SupNorms {
    Real value = 0, grad = 0, hess = 0;

    void absorb(const std::function<Real(Real, Real)>& f, Real th, Real z, Real sth, Real sz) {
        const Real f00 = f(th, z);
        const Real fpt = f(th + sth, z), fmt = f(th - sth, z);
        const Real fpz = f(th, z + sz), fmz = f(th, z - sz);
        const Real fd_th = (fpt - fmt) / (2 * sth);
        const Real fd_z = (fpz - fmz) / (2 * sz);
        const Real fd_thth = (fpt - 2 * f00 + fmt) / (sth * sth);
        const Real fd_zz = (fpz - 2 * f00 + fmz) / (sz * sz);
        const Real fd_thz = (f(th + sth, z + sz) - f(th + sth, z - sz) - f(th - sth, z + sz) +
                             f(th - sth, z - sz)) /
                            (4 * sth * sz);
        for (Real v : {f00, fd_th, fd_z, fd_thth, fd_zz, fd_thz}) check_finite(v, th, z, "surface value");
        value = std::max(value, std::abs(f00));
        grad = std::max({grad, std::abs(fd_th), std::abs(fd_z)});
        hess = std::max({hess, std::abs(fd_thth), std::abs(fd_zz), std::abs(fd_thz)});
    }

    Real w1() const { return std::max(value, grad); }
    Real w2() const { return std::max({value, grad, hess}); }
};

} // namespace

DomainParams domain_params(const MidSurface& s, int grid_resolution) {
    if (grid_resolution < 8) throw usage_error("domain_params: grid_resolution must be >= 8");

    DomainParams out;
    out.omega = s.omega;
    out.a = std::numeric_limits<Real>::infinity();
    out.l = std::numeric_limits<Real>::infinity();

    SupNorms Ath, Az, kth, kz, zlo, zhi;

    auto run_level = [&](int n) {
        const Real sth = s.omega / n;
        for (int i = 0; i <= n; ++i) {
            const Real th = s.omega * i / n;
            const Real z1 = s.z_lower(th), z2 = s.z_upper(th);
            check_finite(z1, th, z1, "z bound");
            check_finite(z2, th, z2, "z bound");
            out.L = std::max(out.L, z2 - z1);
            out.l = std::min(out.l, z2 - z1);
            const Real sz = (z2 - z1) / n;
            // 1D sup-norms of the z-range functions.
            const Real szlo = (s.z_lower(th + sth) - s.z_lower(th - sth)) / (2 * sth);
            const Real szhi = (s.z_upper(th + sth) - s.z_upper(th - sth)) / (2 * sth);
            zlo.value = std::max(zlo.value, std::abs(z1));
            zlo.grad = std::max(zlo.grad, std::abs(szlo));
            zhi.value = std::max(zhi.value, std::abs(z2));
            zhi.grad = std::max(zhi.grad, std::abs(szhi));
            for (int j = 0; j <= n; ++j) {
                const Real z = z1 + (z2 - z1) * j / n;
                const Real ath = s.A_theta(th, z), az = s.A_z(th, z);
                check_finite(ath, th, z, "A_theta");
                check_finite(az, th, z, "A_z");
                out.a = std::min({out.a, ath, az});
                Ath.absorb(s.A_theta, th, z, sth, sz);
                Az.absorb(s.A_z, th, z, sth, sz);
                kth.absorb(s.kappa_theta, th, z, sth, sz);
                kz.absorb(s.kappa_z, th, z, sth, sz);
            }
        }
    };

    // Nested dyadic levels; each level only widens the accumulated bounds.
    int n = 8;
    while (true) {
        run_level(n);
        if (n >= grid_resolution) break;
        n = std::min(2 * n, grid_resolution);
    }

    out.A = Ath.w2() + Az.w2();
    out.k = kth.w1() + kz.w1();
    out.Z = zlo.w1() + zhi.w1();

    if (!(out.a > 0)) throw validation_error("metric floor a must be positive on the patch");
    if (!(out.l > 0)) throw validation_error("z-extent floor l must be positive (patch pinches off)");
    return out;
}

const char* to_string(ThicknessProfile profile) {
    switch (profile) {
    case ThicknessProfile::constant: return "constant";
    case ThicknessProfile::tilted: return "tilted";
    case ThicknessProfile::wavy: return "wavy";
    }
    return "?";
}

ThicknessProfile thickness_profile_from_string(const std::string& name) {
    if (name == "constant") return ThicknessProfile::constant;
    if (name == "tilted") return ThicknessProfile::tilted;
    if (name == "wavy") return ThicknessProfile::wavy;
    throw geometry_error("unknown thickness profile '" + name + "'");
}

Real max_thickness(const MidSurface& s, Real c1) {
    const DomainParams dp = domain_params(s, 64);
    if (dp.k <= 0) return std::numeric_limits<Real>::infinity();
    return 0.4 / (c1 * dp.k);
}

namespace {

void validate_thin_domain(const ThinDomain& d) {
    const MidSurface& s = d.surface;
    const int n_th = 192, n_z = 48;
    for (int i = 0; i <= n_th; ++i) {
        const Real th = s.omega * i / n_th;
        const Real z1 = s.z_lower(th), z2 = s.z_upper(th);
        for (int j = 0; j <= n_z; ++j) {
            const Real z = z1 + (z2 - z1) * j / n_z;
            const Real ath = s.A_theta(th, z), az = s.A_z(th, z);
            for (auto [g, name] : {std::pair{d.g1(th, z), "g1"}, std::pair{d.g2(th, z), "g2"}}) {
                if (!(g >= d.h * (1 - 1e-12)) || !(g <= d.c1 * d.h * (1 + 1e-12))) {
                    std::ostringstream os;
                    os << "thickness profile violates h <= " << name << " <= c1*h at (theta=" << th
                       << ", z=" << z << "): " << name << "=" << g << ", h=" << d.h << ", c1*h="
                       << d.c1 * d.h;
                    throw validation_error(os.str());
                }
            }
            const Real slope1 =
                std::hypot(d.dg1_dtheta(th, z) / ath, d.dg1_dz(th, z) / az);
            const Real slope2 =
                std::hypot(d.dg2_dtheta(th, z) / ath, d.dg2_dz(th, z) / az);
            if (!(slope1 + slope2 <= d.c2 * d.h * (1 + 1e-12))) {
                std::ostringstream os;
                os << "thickness profile violates |grad g1| + |grad g2| <= c2*h at (theta=" << th
                   << ", z=" << z << "): measured slope " << slope1 + slope2 << ", bound "
                   << d.c2 * d.h;
                throw validation_error(os.str());
            }
        }
    }
}

} // namespace

ThinDomain make_thin_domain(const MidSurface& s, Real h, ThicknessProfile profile, Real c1, Real c2,
                            Real wavy_slope_factor) {
    if (!(c1 >= 1) || !(c2 > 0)) throw geometry_error("make_thin_domain: need c1 >= 1 and c2 > 0");
    const DomainParams dp = domain_params(s, 64);
    const Real hmax = dp.k > 0 ? 0.4 / (c1 * dp.k) : std::numeric_limits<Real>::infinity();
    if (!(h > 0) || !(h < hmax)) {
        std::ostringstream os;
        os << "make_thin_domain: h=" << h << " outside (0, h_max=" << hmax << ")";
        throw geometry_error(os.str());
    }

    ThinDomain d;
    d.surface = s;
    d.h = h;
    d.c1 = c1;
    d.c2 = c2;
    d.kappa_norm = dp.k;

    auto zero = [](Real, Real) { return 0.0; };
    switch (profile) {
    case ThicknessProfile::constant: {
        d.g1 = d.g2 = [h](Real, Real) { return h; };
        d.dg1_dtheta = d.dg1_dz = d.dg2_dtheta = d.dg2_dz = zero;
        break;
    }
    case ThicknessProfile::tilted: {
        const Real omega = s.omega;
        d.g1 = [h](Real, Real) { return h; };
        d.dg1_dtheta = d.dg1_dz = zero;
        d.g2 = [h, omega, c1](Real th, Real) {
            return std::clamp(h * (1 + 0.5 * th / omega), h, c1 * h);
        };
        d.dg2_dtheta = [h, omega](Real, Real) { return 0.5 * h / omega; };
        d.dg2_dz = zero;
        break;
    }
    case ThicknessProfile::wavy: {
        const Real omega = s.omega;
        // Amplitude calibrated so the measured surface slope equals
        // wavy_slope_factor * h at the metric floor.
        const Real beta = wavy_slope_factor * omega * dp.a / M_PI;
        d.g1 = [h](Real, Real) { return h; };
        d.dg1_dtheta = d.dg1_dz = zero;
        d.g2 = [h, beta, omega](Real th, Real) {
            return h * (1 + 0.5 * beta * (1 + std::sin(2 * M_PI * th / omega)));
        };
        d.dg2_dtheta = [h, beta, omega](Real th, Real) {
            return h * beta * (M_PI / omega) * std::cos(2 * M_PI * th / omega);
        };
        d.dg2_dz = zero;
        break;
    }
    }

    validate_thin_domain(d);
    return d;
}

} // namespace kornlab
