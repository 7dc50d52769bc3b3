#include "kornlab/quadrature.hpp"

#include <cmath>
#include <sstream>

namespace kornlab {

namespace {

QuadratureGrid build(const ThinDomain& d, GridResolution res, bool band, Real t_lo, Real t_hi) {
    const MidSurface& s = d.surface;
    const int n_th = res.n_theta, n_z = res.n_z;
    const int n_t = std::max(4, static_cast<int>(std::lround(res.n_t * d.c1 / 2.0)));
    if (n_th < 1 || n_z < 1) throw usage_error("make_quadrature: resolution must be positive");

    QuadratureGrid g;
    g.n_theta = n_th;
    g.n_z = n_z;
    g.n_t = n_t;
    const Eigen::Index total = static_cast<Eigen::Index>(n_th) * n_z * n_t;
    g.t.resize(total);
    g.theta.resize(total);
    g.z.resize(total);
    g.weight.resize(total);

    const Real dth = s.omega / n_th;
    Eigen::Index c = 0;
    for (int i = 0; i < n_th; ++i) {
        const Real th = (i + 0.5) * dth;
        const Real z1 = s.z_lower(th), z2 = s.z_upper(th);
        const Real dz = (z2 - z1) / n_z;
        for (int j = 0; j < n_z; ++j) {
            const Real z = z1 + (j + 0.5) * dz;
            const Real lo = band ? t_lo : -d.g1(th, z);
            const Real hi = band ? t_hi : d.g2(th, z);
            const Real dt = (hi - lo) / n_t;
            const Real ath = s.A_theta(th, z), az = s.A_z(th, z);
            const Real kth = s.kappa_theta(th, z), kz = s.kappa_z(th, z);
            for (int k = 0; k < n_t; ++k, ++c) {
                const Real t = lo + (k + 0.5) * dt;
                const Real jt = 1 + t * kth, jz = 1 + t * kz;
                if (!(jt >= 0.5) || !(jz >= 0.5)) {
                    std::ostringstream os;
                    os << "normal Jacobian factor below 0.5 at (t=" << t << ", theta=" << th
                       << ", z=" << z << "): 1+t*kappa = (" << jt << ", " << jz << ")";
                    throw singularity_error(os.str());
                }
                g.t[c] = t;
                g.theta[c] = th;
                g.z[c] = z;
                g.weight[c] = dth * dz * dt * ath * az * jt * jz;
            }
        }
    }
    return g;
}

} // namespace

QuadratureGrid make_quadrature(const ThinDomain& d, GridResolution res) {
    return build(d, res, false, 0, 0);
}

QuadratureGrid make_quadrature_band(const ThinDomain& d, GridResolution res, Real t_lo, Real t_hi) {
    if (!(t_lo < t_hi)) throw usage_error("make_quadrature_band: need t_lo < t_hi");
    return build(d, res, true, t_lo, t_hi);
}

} // namespace kornlab
