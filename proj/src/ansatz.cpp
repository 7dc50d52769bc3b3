#include "kornlab/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kornlab {

namespace {

// exp(-1/(1-x^2)) on (-1,1), identically zero outside. The guard on
// u = 1 - x^2 avoids overflow in the rational prefactors where the
// exponential has already underflowed to zero.
struct Bump {
    static Real value(Real x) {
        const Real u = 1 - x * x;
        if (u <= 1e-8) return 0.0;
        return std::exp(-1.0 / u);
    }
    static Real d1(Real x) {
        const Real u = 1 - x * x;
        if (u <= 1e-8) return 0.0;
        return std::exp(-1.0 / u) * (-2 * x / (u * u));
    }
    static Real d2(Real x) {
        const Real u = 1 - x * x;
        if (u <= 1e-8) return 0.0;
        const Real u2 = u * u;
        return std::exp(-1.0 / u) * (4 * x * x / (u2 * u2) - 2 * (1 + 3 * x * x) / (u2 * u));
    }
};

} // namespace

AnsatzProfile default_bump_profile(const MidSurface& s, Real h_ref) {
    if (!(h_ref > 0)) throw usage_error("default_bump_profile: h_ref must be positive");
    const DomainParams dp = domain_params(s, 64);
    const Real width = std::min(s.omega, dp.l) / 2; // full support width in patch units
    const Real sq = std::sqrt(h_ref);

    const Real xi_c = (s.omega / 2) / sq;
    const Real xi_w = (width / 2) / sq;
    const Real eta_c = 0.5 * (s.z_lower(s.omega / 2) + s.z_upper(s.omega / 2));
    const Real eta_w = width / 2;

    AnsatzProfile pr;
    pr.xi_lo = xi_c - xi_w;
    pr.xi_hi = xi_c + xi_w;
    pr.eta_lo = eta_c - eta_w;
    pr.eta_hi = eta_c + eta_w;
    pr.W = [=](Real xi, Real eta) {
        return Bump::value((xi - xi_c) / xi_w) * Bump::value((eta - eta_c) / eta_w);
    };
    pr.W_xi = [=](Real xi, Real eta) {
        return Bump::d1((xi - xi_c) / xi_w) / xi_w * Bump::value((eta - eta_c) / eta_w);
    };
    pr.W_eta = [=](Real xi, Real eta) {
        return Bump::value((xi - xi_c) / xi_w) * Bump::d1((eta - eta_c) / eta_w) / eta_w;
    };
    pr.W_xixi = [=](Real xi, Real eta) {
        return Bump::d2((xi - xi_c) / xi_w) / (xi_w * xi_w) * Bump::value((eta - eta_c) / eta_w);
    };
    pr.W_xieta = [=](Real xi, Real eta) {
        return Bump::d1((xi - xi_c) / xi_w) / xi_w * Bump::d1((eta - eta_c) / eta_w) / eta_w;
    };
    pr.W_etaeta = [=](Real xi, Real eta) {
        return Bump::value((xi - xi_c) / xi_w) * Bump::d2((eta - eta_c) / eta_w) / (eta_w * eta_w);
    };
    return pr;
}

ShellField make_ansatz(const AnsatzProfile& profile, const ThinDomain& d) {
    const MidSurface s = d.surface;
    const Real sq = std::sqrt(d.h);

    const Real th_lo = sq * profile.xi_lo, th_hi = sq * profile.xi_hi;
    const Real z_lo = s.z_lower(0), z_hi = s.z_upper(0);
    const Real tol = 1e-12;
    if (th_lo < -tol || th_hi > s.omega + tol || profile.eta_lo < z_lo - tol ||
        profile.eta_hi > z_hi + tol) {
        std::ostringstream os;
        os << "ansatz support overflows the patch at h=" << d.h << ": needs theta in [" << th_lo
           << ", " << th_hi << "] and z in [" << profile.eta_lo << ", " << profile.eta_hi
           << "], patch provides theta in [0, " << s.omega << "], z in [" << z_lo << ", " << z_hi
           << "]";
        throw validation_error(os.str());
    }

    auto pr = profile;
    auto A_theta = s.A_theta, A_z = s.A_z;
    auto dAth_dth = s.dA_theta_dtheta, dAth_dz = s.dA_theta_dz;
    auto dAz_dth = s.dA_z_dtheta, dAz_dz = s.dA_z_dz;

    auto value = [pr, sq, A_theta, A_z](Real t, Real th, Real z) -> Vec3 {
        const Real xi = th / sq;
        return Vec3(pr.W(xi, z), -t * pr.W_xi(xi, z) / (A_theta(th, z) * sq),
                    -t * pr.W_eta(xi, z) / A_z(th, z));
    };
    auto partials = [pr, sq, A_theta, A_z, dAth_dth, dAth_dz, dAz_dth, dAz_dz](Real t, Real th,
                                                                               Real z) -> Mat3 {
        const Real xi = th / sq;
        const Real ath = A_theta(th, z), az = A_z(th, z);
        const Real wxi = pr.W_xi(xi, z), weta = pr.W_eta(xi, z);
        const Real wxixi = pr.W_xixi(xi, z), wxieta = pr.W_xieta(xi, z), wetaeta = pr.W_etaeta(xi, z);
        Mat3 P;
        P(0, 0) = 0;
        P(0, 1) = wxi / sq;
        P(0, 2) = weta;
        P(1, 0) = -wxi / (ath * sq);
        P(1, 1) = -t * (wxixi / sq * ath - wxi * dAth_dth(th, z)) / (ath * ath * sq);
        P(1, 2) = -t * (wxieta * ath - wxi * dAth_dz(th, z)) / (ath * ath * sq);
        P(2, 0) = -weta / az;
        P(2, 1) = -t * (wxieta / sq * az - weta * dAz_dth(th, z)) / (az * az);
        P(2, 2) = -t * (wetaeta * az - weta * dAz_dz(th, z)) / (az * az);
        return P;
    };
    return ShellField{std::move(value), std::move(partials)};
}

RatioReport ratio_report(const ShellField& f, const ThinDomain& d, Real p, GridResolution res) {
    const QuadratureGrid g = make_quadrature(d, res);

    RatioReport r;
    r.h = d.h;
    r.p = p;
    r.norm_u = lp_norm(g, p, [&](Real t, Real th, Real z) { return f.value(t, th, z); });
    r.norm_ut = lp_norm(g, p, [&](Real t, Real th, Real z) { return f.value(t, th, z)[0]; });
    r.norm_grad = lp_norm(g, p, [&](Real t, Real th, Real z) { return eval_gradient(f, d, t, th, z); });
    r.norm_strain =
        lp_norm(g, p, [&](Real t, Real th, Real z) { return strain(eval_gradient(f, d, t, th, z)); });

    const Real interp_den =
        r.norm_ut * r.norm_strain / d.h + r.norm_u * r.norm_u + r.norm_strain * r.norm_strain;
    const Real second_den = (r.norm_u * r.norm_u + r.norm_strain * r.norm_strain) / d.h;
    if (!(interp_den > 0) || !(second_den > 0))
        throw degenerate_field_error("ratio_report: field is numerically zero on the domain");
    r.interpolation_ratio = r.norm_grad * r.norm_grad / interp_den;
    r.second_ratio = r.norm_grad * r.norm_grad / second_den;
    return r;
}

std::vector<RatioReport> sharpness_sweep(const AnsatzProfile& profile, const MidSurface& s,
                                         ThicknessProfile thickness, Real c1, Real c2, Real p,
                                         const std::vector<Real>& h_ladder, GridResolution base) {
    for (std::size_t i = 1; i < h_ladder.size(); ++i)
        if (!(h_ladder[i] < h_ladder[i - 1]))
            throw usage_error("sharpness_sweep: h ladder must be strictly decreasing");
    const Real hmax = max_thickness(s, c1);
    for (Real h : h_ladder) {
        if (!(h > 0) || !(h < hmax)) {
            std::ostringstream os;
            os << "sharpness_sweep: ladder entry h=" << h << " outside (0, h_max=" << hmax << ")";
            throw usage_error(os.str());
        }
    }

    std::vector<RatioReport> out;
    out.reserve(h_ladder.size());
    for (Real h : h_ladder) {
        const ThinDomain d = make_thin_domain(s, h, thickness, c1, c2);
        const ShellField f = make_ansatz(profile, d);
        GridResolution res = base;
        res.n_theta = std::max(res.n_theta, static_cast<int>(std::ceil(16.0 / std::sqrt(h))));
        out.push_back(ratio_report(f, d, p, res));
    }
    return out;
}

} // namespace kornlab
