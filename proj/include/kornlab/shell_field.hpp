#pragma once

#include "kornlab/geometry.hpp"
#include "kornlab/quadrature.hpp"
#include "kornlab/types.hpp"

#include <cstdint>
#include <functional>

namespace kornlab {

/// Displacement field in the local frame (n, e_theta, e_z).
/// value(t,theta,z) = (u_t, u_theta, u_z); partials row i holds
/// (du_i/dt, du_i/dtheta, du_i/dz). Partials are either analytic or
/// centered-difference approximations of grid-sampled data.
struct ShellField {
    std::function<Vec3(Real, Real, Real)> value;
    std::function<Mat3(Real, Real, Real)> partials;
};

/// Symmetric part (M + M^T)/2.
inline Mat3 strain(const Mat3& M) { return 0.5 * (M + M.transpose()); }

/// Surface scalars entering the displacement-gradient formula at one
/// (theta, z) point.
struct SurfacePointData {
    Real A_theta, A_z;
    Real dA_theta_dz, dA_z_dtheta;
    Real kappa_theta, kappa_z;
};

SurfacePointData surface_point_data(const MidSurface& s, Real theta, Real z);

/// Displacement gradient in the orthonormal frame (n, e_theta, e_z) at
/// normal offset t. With `simplified` the (1 + t kappa) factors in the
/// denominators of the second and third columns are dropped, giving the
/// mid-surface-restricted gradient.
Mat3 shell_gradient(const SurfacePointData& sp, Real t, const Vec3& u, const Mat3& partials,
                    bool simplified);

Mat3 eval_gradient(const ShellField& f, const ThinDomain& d, Real t, Real theta, Real z);
Mat3 eval_simplified_gradient(const ShellField& f, const ThinDomain& d, Real t, Real theta, Real z);

/// Infinitesimal rigid motion u(x) = axis x (x - center), re-expressed in
/// the local frame at x = r(theta,z) + t n(theta,z). Partials are centered
/// differences at the grid spacing of `res` (one-sided second order at the
/// domain faces), so the strain vanishes at rate O(step^2) under refinement.
ShellField rigid_field(const Vec3& axis, const Vec3& center, const ThinDomain& d,
                       GridResolution res = {});

/// Wraps a field with centered/one-sided finite-difference partials at the
/// grid spacing of `res`, discarding its analytic partials.
ShellField sampled_field(const ShellField& f, const ThinDomain& d, GridResolution res);

ShellField scale_field(const ShellField& f, Real c);

/// Smooth random trigonometric field with analytic partials; deterministic
/// in the seed.
ShellField random_bump_field(const ThinDomain& d, std::uint64_t seed);

} // namespace kornlab
