#pragma once

#include "kornlab/geometry.hpp"
#include "kornlab/summation.hpp"
#include "kornlab/types.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <type_traits>
#include <utility>

namespace kornlab {

struct GridResolution {
    int n_theta = 64;
    int n_z = 64;
    int n_t = 8;

    GridResolution doubled() const { return {2 * n_theta, 2 * n_z, 2 * n_t}; }
    GridResolution scaled(Real k) const {
        auto s = [k](int n) { return std::max(4, static_cast<int>(std::lround(n * k))); };
        return {s(n_theta), s(n_z), s(n_t)};
    }
};

/// Tensor-product midpoint rule over the thin domain, flattened to cell
/// arrays. Weights carry the full volume element
///   A_theta * A_z * (1 + t kappa_theta) * (1 + t kappa_z)
/// so integrals are plain weighted sums over cells.
struct QuadratureGrid {
    int n_theta = 0, n_z = 0, n_t = 0;
    ArrayX t, theta, z, weight;

    Eigen::Index cells() const { return weight.size(); }
    Eigen::Index cell_index(int i_theta, int i_z, int i_t) const {
        return static_cast<Eigen::Index>((i_theta * n_z + i_z) * n_t + i_t);
    }
};

/// Builds the grid for t in (-g1, g2). n_t is scaled with c1 so wider
/// profiles keep at least the default number of cells across the thickness.
QuadratureGrid make_quadrature(const ThinDomain& d, GridResolution res = {});

/// Same (theta, z) layout but a fixed normal band t in (t_lo, t_hi); used for
/// the inner-shell restriction of the subdivision argument.
QuadratureGrid make_quadrature_band(const ThinDomain& d, GridResolution res, Real t_lo, Real t_hi);

namespace detail {

inline Real abs_measure(Real v) { return std::abs(v); }
inline Real abs_measure(const Vec3& v) { return v.norm(); }
inline Real abs_measure(const Mat3& m) { return m.norm(); } // Frobenius

} // namespace detail

/// L^p norm over the grid: (sum w * |f|^p)^(1/p). The callable may return a
/// scalar, a Vec3 (Euclidean magnitude) or a Mat3 (Frobenius magnitude).
template <class F>
Real lp_norm(const QuadratureGrid& g, Real p, F&& f) {
    if (!(p > 1.0) || !std::isfinite(p)) throw usage_error("lp_norm: p must lie in (1, inf)");
    ArrayX terms(g.cells());
    for (Eigen::Index c = 0; c < g.cells(); ++c) {
        const Real a = detail::abs_measure(f(g.t[c], g.theta[c], g.z[c]));
        if (!std::isfinite(a)) {
            std::ostringstream os;
            os << "non-finite integrand at (t=" << g.t[c] << ", theta=" << g.theta[c]
               << ", z=" << g.z[c] << ")";
            throw evaluation_error(os.str());
        }
        terms[c] = g.weight[c] * std::pow(a, p);
    }
    return std::pow(pairwise_sum(terms), 1.0 / p);
}

/// sum w * |f|^p without the final root; used where p-th powers are
/// aggregated over partitions.
template <class F>
Real lp_power_integral(const QuadratureGrid& g, Real p, F&& f) {
    ArrayX terms(g.cells());
    for (Eigen::Index c = 0; c < g.cells(); ++c) {
        const Real a = detail::abs_measure(f(g.t[c], g.theta[c], g.z[c]));
        if (!std::isfinite(a)) {
            std::ostringstream os;
            os << "non-finite integrand at (t=" << g.t[c] << ", theta=" << g.theta[c]
               << ", z=" << g.z[c] << ")";
            throw evaluation_error(os.str());
        }
        terms[c] = g.weight[c] * std::pow(a, p);
    }
    return pairwise_sum(terms);
}

} // namespace kornlab
