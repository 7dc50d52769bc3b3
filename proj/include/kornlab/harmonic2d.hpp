#pragma once

#include "kornlab/types.hpp"

#include <functional>
#include <vector>

namespace kornlab {

/// Scalar profile on [0, b] with analytic first and second derivatives.
struct Profile1D {
    std::function<Real(Real)> value, d1, d2;
};

enum class Profile2DKind { constant, tilted, wavy };

/// Planar thin domain D = {(x,y) : y in (0,b), x in (-phi1(y), phi2(y))}
/// with h <= phi_i <= C1*h and |phi_i'| <= C2*h.
struct ThinDomain2D {
    Real b = 0, h = 0, C1 = 0, C2 = 0;
    Profile1D phi1, phi2;

    Real width(Real y) const { return phi1.value(y) + phi2.value(y); }
};

ThinDomain2D make_thin_domain_2d(Real b, Real h, Profile2DKind kind, Real C1, Real C2,
                                 Real wavy_slope_factor = 0.8);
ThinDomain2D make_thin_domain_2d(Real b, Real h, Profile1D phi1, Profile1D phi2, Real C1, Real C2);

/// Boundary-fitted tensor grid: (s, y) in [0,1] x [0,b] maps to
/// x = -phi1(y) + s * (phi1(y) + phi2(y)). Carries trapezoid area weights
/// including the map Jacobian phi1 + phi2.
struct BoundaryFittedGrid {
    ThinDomain2D domain;
    int n_s = 0, n_y = 0;

    Real ds() const { return 1.0 / n_s; }
    Real dy() const { return domain.b / n_y; }
    Real y_of(int j) const { return domain.b * j / n_y; }
    Real x_of(int i, int j) const {
        const Real y = y_of(j);
        return -domain.phi1.value(y) + (static_cast<Real>(i) / n_s) * domain.width(y);
    }
    Real area_weight(int i, int j) const {
        const Real cs = (i == 0 || i == n_s) ? 0.5 : 1.0;
        const Real cy = (j == 0 || j == n_y) ? 0.5 : 1.0;
        return cs * cy * ds() * dy() * domain.width(y_of(j));
    }
};

/// Discrete harmonic function: the mapped five-point-plus-cross stencil of
/// the transformed Laplacian with Dirichlet data on all four sides.
struct Harmonic2DSolution {
    BoundaryFittedGrid grid;
    MatX w;       // nodal values, (n_s+1) x (n_y+1)
    MatX wx, wy;  // physical derivatives at nodes
    Real residual_norm = 0;     // |A w - rhs|_2 over interior nodes
    Real relative_residual = 0; // residual / |w|_2
};

Harmonic2DSolution solve_harmonic(const ThinDomain2D& d, const std::function<Real(Real, Real)>& boundary,
                                  int n_s, int n_y);

/// Physical-derivative fields (F_x, F_y) of nodal data F on the grid, by
/// second-order differences in the mapped coordinates and the chain rule.
std::pair<MatX, MatX> nodal_derivatives(const BoundaryFittedGrid& g, const MatX& F);

struct Shift {
    Real a = 0, residual = 0;
};

/// Best constant shift in L^p: minimizes (sum w |v - a|^p)^(1/p). For p = 2
/// this is the weighted mean; otherwise bisection on the monotone derivative
/// of the strictly convex objective.
Shift optimal_shift(const ArrayX& values, const ArrayX& weights, Real p);
Shift optimal_shift(const BoundaryFittedGrid& g, const MatX& field, Real p);

struct Lemma41Result {
    Real lhs = 0;        // inf_a |dw/dy - a|_p
    Real rhs_factor = 0; // (b/h) |dw/dx|_p
    bool kernel = false; // both sides at numerical zero (affine w)
};
Lemma41Result check_lemma41(const Harmonic2DSolution& sol, Real p);

/// |dw/dy|_p^2 / ( |w|_p |dw/dx|_p / h + |w|_p^2 / b^2 + |dw/dx|_p^2 ).
Real check_lemma42(const Harmonic2DSolution& sol, Real p);

/// Interior-weighted gradient ratio: integral of rho^p |grad w|^p over
/// integral of |w|^p, with rho the exact distance to the domain boundary
/// (vertical edges directly, lateral curves by Newton projection).
Real check_lemma43(const Harmonic2DSolution& sol, Real p);

Real boundary_distance(const ThinDomain2D& d, Real x, Real y);

struct Function1D {
    std::function<Real(Real)> value, deriv;
};

struct Lemma44Result {
    Real lhs = 0, rhs = 0;
};

/// Tail-vs-head 1D bound with explicit constants:
///   lhs = int_{a+lambda(b-a)}^b |f|^p
///   rhs = ((2+lambda)/lambda) int_a^{a+lambda(b-a)} |f|^p
///         + 2^p (p-1)^(p-1) int_a^b (b-t)^p |f'|^p,
/// both by adaptive quadrature at relative tolerance 1e-9.
Lemma44Result check_lemma44(const Function1D& f, Real a, Real b, Real lambda, Real p);

/// Planar vector field sampled at the grid nodes together with its Jacobian
/// entries (exact for closed-form fields, finite differences otherwise).
struct NodalField2D {
    BoundaryFittedGrid grid;
    MatX u, v;
    MatX j11, j12, j21, j22;
};

NodalField2D sample_field_2d(const BoundaryFittedGrid& g, const std::function<Vec2(Real, Real)>& value,
                             const std::function<Mat2(Real, Real)>& jacobian);

/// The strain-diagonalizing companion of a harmonic w:
///   u = w,  v(x,y) = -int_0^x dw/dy (t,y) dt + int_0^y dw/dx (0,z) dz
/// by composite trapezoid along grid lines through x = 0. Analytically
/// e(u,v) = (dw/dx) * Identity.
NodalField2D conjugate_field(const Harmonic2DSolution& sol);

struct SkewChain {
    std::vector<Real> a;       // per-strip optimal skew scalar, a[0] is the reference
    Real max_deviation = 0;    // max_k |a_1 - a_k|
    Real chain_lhs = 0;        // max_k sqrt(2) |a_1 - a_k| |D_k|^(1/p)
    Real strain_norm = 0;      // |e(W)|_p on the whole domain
    Real strain_strip_sum = 0; // sum_k |e(W)|_p on the strips
    int n_strips = 0;
};

/// Overlapping-strip skew chaining: strips D_k = {y in (b(k-1)/N, b(k+1)/N)}
/// with N = floor(b/h)+1; per strip the L^p-optimal skew scalar is found by
/// bisection on the convex 1-parameter objective.
SkewChain strip_chain(const NodalField2D& field, const ThinDomain2D& d, Real p);

} // namespace kornlab
