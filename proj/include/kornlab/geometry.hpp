#pragma once

#include "kornlab/types.hpp"

#include <functional>
#include <map>
#include <string>

namespace kornlab {

enum class SurfaceKind { plate, cylinder, sphere_cap, catenoid };

const char* to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

using SurfaceParams = std::map<std::string, Real>;

/// A single-patch mid-surface parametrized by principal variables (theta, z),
/// theta in [0, omega], z in [z_lower(theta), z_upper(theta)].
///
/// All evaluators are closed-form and remain valid in a neighborhood of the
/// patch, so finite-difference stencils may poke slightly past the boundary.
/// The normal is oriented per kind so that the principal curvatures of the
/// cylinder and spherical cap come out positive; the defining relation is
/// d n / d alpha = kappa_alpha * A_alpha * e_alpha  (alpha = theta, z),
/// which makes the map (t,theta,z) -> r + t n have the tangent lengths
/// A_alpha * (1 + t * kappa_alpha) used throughout the gradient assembly.
struct MidSurface {
    SurfaceKind kind = SurfaceKind::plate;
    SurfaceParams params;

    Real omega = 0;
    std::function<Real(Real)> z_lower, z_upper; // z^1(theta), z^2(theta)

    std::function<Vec3(Real, Real)> point;          // r(theta, z)
    std::function<Vec3(Real, Real)> d_point_dtheta; // dr/dtheta
    std::function<Vec3(Real, Real)> d_point_dz;     // dr/dz
    std::function<Vec3(Real, Real)> normal;         // unit normal n(theta, z)

    std::function<Real(Real, Real)> A_theta, A_z; // metric coefficients
    std::function<Real(Real, Real)> dA_theta_dtheta, dA_theta_dz;
    std::function<Real(Real, Real)> dA_z_dtheta, dA_z_dz;
    std::function<Real(Real, Real)> kappa_theta, kappa_z; // principal curvatures

    Vec3 e_theta(Real theta, Real z) const { return d_point_dtheta(theta, z) / A_theta(theta, z); }
    Vec3 e_z(Real theta, Real z) const { return d_point_dz(theta, z) / A_z(theta, z); }

    /// Orthonormal local frame, columns (n, e_theta, e_z).
    Mat3 frame(Real theta, Real z) const;

    Real z_mid() const { return 0.5 * (z_lower(0.0) + z_upper(0.0)); }
};

MidSurface make_surface(SurfaceKind kind, const SurfaceParams& params);
MidSurface make_surface(const std::string& kind, const SurfaceParams& params);

/// Scalar parameters of the patch: metric floor a, metric W^{2,inf} size A,
/// curvature W^{1,inf} size k, z-extent bounds L (max) and l (min), and the
/// W^{1,inf} size Z of the z-range functions.
struct DomainParams {
    Real a = 0, A = 0, k = 0, L = 0, Z = 0, omega = 0, l = 0;
};

/// Estimates the parameters on a nested dyadic sample ladder (8, 16, ...,
/// grid_resolution). Sup-type quantities accumulate maxima over every level
/// and the metric floor accumulates minima, so refining the grid can only
/// tighten each bound in its conservative direction.
DomainParams domain_params(const MidSurface& s, int grid_resolution);

enum class ThicknessProfile { constant, tilted, wavy };

const char* to_string(ThicknessProfile profile);
ThicknessProfile thickness_profile_from_string(const std::string& name);

/// Thin domain around a mid-surface: t in (-g1(theta,z), g2(theta,z)) with
/// h <= g_i <= c1*h and surface slope |grad g1| + |grad g2| <= c2*h.
struct ThinDomain {
    MidSurface surface;
    Real h = 0, c1 = 0, c2 = 0;
    std::function<Real(Real, Real)> g1, g2;
    std::function<Real(Real, Real)> dg1_dtheta, dg1_dz, dg2_dtheta, dg2_dz;
    Real kappa_norm = 0; // curvature bound backing the Jacobian guard
};

/// Largest admissible thickness scale: 0.4 / (c1 * k), so that the normal
/// Jacobian factors 1 + t*kappa stay >= 0.6 for |t| <= c1*h. Unbounded for
/// flat surfaces (k = 0).
Real max_thickness(const MidSurface& s, Real c1);

ThinDomain make_thin_domain(const MidSurface& s, Real h, ThicknessProfile profile, Real c1, Real c2,
                            Real wavy_slope_factor = 0.8);

} // namespace kornlab
