#pragma once

#include "kornlab/geometry.hpp"
#include "kornlab/quadrature.hpp"
#include "kornlab/shell_field.hpp"
#include "kornlab/types.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <utility>
#include <vector>

namespace kornlab {

/// Trilinear nodal space for (u_t, u_theta, u_z) on the mapped tensor grid
/// (tau, theta, sigma) of the thin domain, with the three quadratic forms of
/// the p = 2 constant estimation assembled once:
///   grad_form   : integral of |grad u|_F^2
///   strain_form : integral of |e(u)|_F^2
///   mass_form   : integral of |u|^2
/// Gradients are evaluated with the shell formula at 2x2x2 Gauss points.
/// Requires theta-independent z-bounds (all built-in surfaces qualify).
struct FieldSpace {
    ThinDomain domain;
    int n_t = 0, n_theta = 0, n_z = 0; // cells per direction

    Eigen::SparseMatrix<Real> grad_form, strain_form, mass_form;

    int dim() const { return 3 * (n_t + 1) * (n_theta + 1) * (n_z + 1); }
    int node_dof(int i_t, int i_theta, int i_z, int comp) const {
        return comp + 3 * (i_t + (n_t + 1) * (i_theta + (n_theta + 1) * i_z));
    }
};

FieldSpace make_field_space(const ThinDomain& d, int n_t, int n_theta, int n_z);

/// Nodal interpolant of a shell field (frame components at node positions).
VecX interpolate(const FieldSpace& space, const ShellField& f);

/// |grad u|^2 / (|u|^2 + |e(u)|^2) for the discrete field with the given
/// coefficients.
Real rayleigh_ratio(const FieldSpace& space, const VecX& coeffs);

/// Relative M-norm distance between a nodal vector and its L^2 projection
/// onto the space; zero (up to solver roundoff) certifies membership.
Real span_projection_residual(const FieldSpace& space, const VecX& nodal);

/// Largest generalized eigenvalue of (grad_form, mass_form + strain_form):
/// the discrete optimal constant of the p = 2 second-inequality form.
/// Power iteration on the factored pair with Rayleigh-quotient polish;
/// dense fallback up to dimension 3000 on stagnation.
Real korn2_constant_p2(const FieldSpace& space, Real rel_tol = 1e-6);

struct ScalingFit {
    std::vector<std::pair<Real, Real>> samples; // (h, C)
    Real c = 0, alpha = 0, residual = 0;
};

/// Least-squares line through (log h, log C): C(h) ~ c * h^(-alpha).
ScalingFit fit_scaling(const std::vector<std::pair<Real, Real>>& samples);

/// Axis-aligned box pair D1 inside D2 with cell-aligned padding, so norms of
/// fields supported in D1 agree between the two grids to summation accuracy.
struct NestedBoxPair {
    Vec3 lo, hi;                 // D1
    Eigen::Vector3i n1;          // D1 cells per axis
    Eigen::Vector3i pad_lo, pad_hi; // D2 padding in D1 cells per axis

    Vec3 cell() const { return (hi - lo).cwiseQuotient(n1.cast<Real>()); }
    Vec3 lo2() const { return lo - cell().cwiseProduct(pad_lo.cast<Real>()); }
    Vec3 hi2() const { return hi + cell().cwiseProduct(pad_hi.cast<Real>()); }
    Real volume_ratio() const; // |D2| / |D1|
    NestedBoxPair rescaled(Real lambda) const;
};

struct CartesianField {
    std::function<Vec3(const Vec3&)> value;
    std::function<Mat3(const Vec3&)> jacobian;
};

struct ExtensionResult {
    Real lhs = 0;          // |grad U|_p on D2
    Real rhs = 0;          // |grad U|_p on D1 + |e(U)|_p on D2
    Real grad_inner = 0;   // |grad U|_p on D1
    Real strain_outer = 0; // |e(U)|_p on D2
    Real c_obs() const { return rhs > 0 ? lhs / rhs : 0; }
};

ExtensionResult extension_check(const NestedBoxPair& pair, const CartesianField& field, Real p);

struct SubdivisionReport {
    int N = 0;            // pieces per surface direction
    Real h = 0, p = 0;
    Real direct_grad_power = 0;    // |grad u|_p^p on the whole domain
    Real aggregate_grad_power = 0; // sum of per-piece p-th powers
    Real additivity_gap = 0;       // relative mismatch of the two
    Real aggregate_c_obs = 0;      // |grad|_Omega / (|grad|_shell + |e|_Omega)
    Real max_piece_c_obs = 0;
};

/// Splits the patch into N x N pieces with N = floor(1/h) + 1, forms the
/// inner-shell restriction t in (-h, h) per piece, checks p-th-power
/// additivity against the whole-domain norm and aggregates the per-piece
/// extension constants.
SubdivisionReport subdivision_run(const ThinDomain& d, const ShellField& f, Real p,
                                  GridResolution base = {});

struct InterpolationConstant {
    Real value = 0;
    int used = 0, skipped = 0;
};

/// Largest interpolation-inequality ratio over a family of fields; a lower
/// bound for the optimal constant. Degenerate family members are skipped.
InterpolationConstant interpolation_constant(const ThinDomain& d, Real p,
                                             const std::vector<ShellField>& family,
                                             GridResolution res = {});

/// The default probe family: the saturating field, two rigid motions and two
/// random smooth fields.
std::vector<ShellField> default_field_family(const ThinDomain& d, std::uint64_t seed = 0);

InterpolationConstant interpolation_constant(const ThinDomain& d, Real p,
                                             GridResolution res = {});

} // namespace kornlab
