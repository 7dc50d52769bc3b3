#pragma once

#include "kornlab/geometry.hpp"
#include "kornlab/quadrature.hpp"
#include "kornlab/shell_field.hpp"
#include "kornlab/types.hpp"

#include <functional>
#include <vector>

namespace kornlab {

/// Smooth compactly supported probe W(xi, eta) with analytic partials up to
/// second order; W and all listed partials vanish identically outside the
/// support box.
struct AnsatzProfile {
    std::function<Real(Real, Real)> W, W_xi, W_eta, W_xixi, W_xieta, W_etaeta;
    Real xi_lo = 0, xi_hi = 0, eta_lo = 0, eta_hi = 0;
};

/// Product bump exp(-1/(1-x^2)) in each slot, shifted/scaled so that at the
/// reference thickness h_ref the theta-support is centered at the patch
/// midpoint with full width min(omega, l)/2 (and likewise in z). Because the
/// theta-support of the generated field contracts like sqrt(h), the same
/// profile then fits the patch for every h <= h_ref.
AnsatzProfile default_bump_profile(const MidSurface& s, Real h_ref);

/// The saturating displacement built from the profile:
///   u_t     =  W(theta/sqrt(h), z)
///   u_theta = -t W_xi(theta/sqrt(h), z) / (A_theta sqrt(h))
///   u_z     = -t W_eta(theta/sqrt(h), z) / A_z
/// with all partials wired through analytically.
ShellField make_ansatz(const AnsatzProfile& profile, const ThinDomain& d);

struct RatioReport {
    Real h = 0, p = 0;
    Real norm_u = 0, norm_ut = 0, norm_grad = 0, norm_strain = 0;
    Real interpolation_ratio = 0, second_ratio = 0;
};

/// Evaluates both inequality ratios for a nonzero field:
///   interpolation_ratio = |grad u|^2 / (|u_t| |e(u)| / h + |u|^2 + |e(u)|^2)
///   second_ratio        = |grad u|^2 / ((|u|^2 + |e(u)|^2) / h)
/// with all norms L^p over the thin domain using the exact gradient.
RatioReport ratio_report(const ShellField& f, const ThinDomain& d, Real p,
                         GridResolution res = {});

/// One report per ladder entry with the same profile; the quadrature is
/// refined so n_theta >= 16/sqrt(h) resolves the theta/sqrt(h) scale.
std::vector<RatioReport> sharpness_sweep(const AnsatzProfile& profile, const MidSurface& s,
                                         ThicknessProfile thickness, Real c1, Real c2, Real p,
                                         const std::vector<Real>& h_ladder,
                                         GridResolution base = {});

} // namespace kornlab
