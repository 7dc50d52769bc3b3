#include "kornlab/korn_constants.hpp"

#include "kornlab/ansatz.hpp"
#include "kornlab/summation.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

namespace kornlab {

namespace {

constexpr Real kGauss1 = 0.5 - 0.28867513459481287; // 0.5 -/+ 1/(2 sqrt 3)
constexpr Real kGauss2 = 0.5 + 0.28867513459481287;

struct LocalBasis {
    // Trilinear shape values and reference-coordinate derivatives at one
    // Gauss point, for the 8 cell nodes.
    std::array<Real, 8> val, d_xt, d_xth, d_xz;
};

LocalBasis local_basis(Real xt, Real xth, Real xz) {
    LocalBasis lb;
    for (int a = 0; a < 8; ++a) {
        const int it = a & 1, ith = (a >> 1) & 1, iz = (a >> 2) & 1;
        const Real ft = it ? xt : 1 - xt;
        const Real fth = ith ? xth : 1 - xth;
        const Real fz = iz ? xz : 1 - xz;
        const Real gt = it ? 1.0 : -1.0;
        const Real gth = ith ? 1.0 : -1.0;
        const Real gz = iz ? 1.0 : -1.0;
        lb.val[a] = ft * fth * fz;
        lb.d_xt[a] = gt * fth * fz;
        lb.d_xth[a] = ft * gth * fz;
        lb.d_xz[a] = ft * fth * gz;
    }
    return lb;
}

} // namespace

FieldSpace make_field_space(const ThinDomain& d, int n_t, int n_theta, int n_z) {
    const MidSurface& s = d.surface;
    // The mapped tensor grid assumes a theta-independent z-range.
    const Real z1 = s.z_lower(0), z2 = s.z_upper(0);
    for (Real th : {0.25 * s.omega, 0.5 * s.omega, 0.9 * s.omega})
        if (std::abs(s.z_lower(th) - z1) > 1e-12 || std::abs(s.z_upper(th) - z2) > 1e-12)
            throw usage_error("make_field_space: requires theta-independent z-bounds");

    FieldSpace sp;
    sp.domain = d;
    sp.n_t = n_t;
    sp.n_theta = n_theta;
    sp.n_z = n_z;
    const int dim = sp.dim();

    std::vector<Eigen::Triplet<Real>> tg, te, tm;
    const std::size_t guess = static_cast<std::size_t>(n_t) * n_theta * n_z * 24 * 24;
    tg.reserve(guess);
    te.reserve(guess);
    tm.reserve(guess);

    const Real dth = s.omega / n_theta;
    const Real dsig = 1.0 / n_z, dtau = 1.0 / n_t;

    for (int iz = 0; iz < n_z; ++iz)
        for (int ith = 0; ith < n_theta; ++ith)
            for (int it = 0; it < n_t; ++it) {
                MatX Gl = MatX::Zero(24, 24), El = MatX::Zero(24, 24), Ml = MatX::Zero(24, 24);

                for (Real xz : {kGauss1, kGauss2})
                    for (Real xth : {kGauss1, kGauss2})
                        for (Real xt : {kGauss1, kGauss2}) {
                            const Real tau = (it + xt) * dtau;
                            const Real th = (ith + xth) * dth;
                            const Real sig = (iz + xz) * dsig;
                            const Real z = z1 + sig * (z2 - z1);

                            const Real g1 = d.g1(th, z), g2 = d.g2(th, z);
                            const Real G = g1 + g2;
                            const Real t = -g1 + tau * G;
                            const Real dG_dth = d.dg1_dtheta(th, z) + d.dg2_dtheta(th, z);
                            const Real dG_dz = d.dg1_dz(th, z) + d.dg2_dz(th, z);
                            const Real dtau_dth = (d.dg1_dtheta(th, z) - tau * dG_dth) / G;
                            const Real dtau_dz = (d.dg1_dz(th, z) - tau * dG_dz) / G;

                            const SurfacePointData spd = surface_point_data(s, th, z);
                            const Real jt = 1 + t * spd.kappa_theta, jz = 1 + t * spd.kappa_z;
                            const Real jac = spd.A_theta * spd.A_z * jt * jz;
                            const Real w = 0.125 * dtau * dth * dsig * G * (z2 - z1) * jac;

                            const LocalBasis lb = local_basis(xt, xth, xz);

                            std::array<Mat3, 24> D;
                            std::array<Real, 24> V;
                            for (int a = 0; a < 8; ++a) {
                                // Chain rule (tau, theta, sigma) -> (t, theta, z) at fixed t.
                                const Real phi = lb.val[a];
                                const Real p_tau = lb.d_xt[a] / dtau;
                                const Real p_th_ref = lb.d_xth[a] / dth;
                                const Real p_sig = lb.d_xz[a] / dsig;
                                const Real p_t = p_tau / G;
                                const Real p_th = p_th_ref + p_tau * dtau_dth;
                                const Real p_z = p_sig / (z2 - z1) + p_tau * dtau_dz;
                                for (int c = 0; c < 3; ++c) {
                                    Vec3 u = Vec3::Zero();
                                    u[c] = phi;
                                    Mat3 P = Mat3::Zero();
                                    P(c, 0) = p_t;
                                    P(c, 1) = p_th;
                                    P(c, 2) = p_z;
                                    const int l = 3 * a + c;
                                    D[l] = shell_gradient(spd, t, u, P, false);
                                    V[l] = phi;
                                }
                            }
                            for (int la = 0; la < 24; ++la) {
                                const Mat3 Sa = strain(D[la]);
                                for (int lbq = 0; lbq <= la; ++lbq) {
                                    const Real gv = w * D[la].cwiseProduct(D[lbq]).sum();
                                    const Real ev = w * Sa.cwiseProduct(strain(D[lbq])).sum();
                                    Gl(la, lbq) += gv;
                                    El(la, lbq) += ev;
                                    if (la % 3 == lbq % 3) Ml(la, lbq) += w * V[la] * V[lbq];
                                }
                            }
                        }

                // Scatter the symmetric local blocks.
                std::array<int, 24> dof;
                for (int a = 0; a < 8; ++a) {
                    const int nt = it + (a & 1), nth = ith + ((a >> 1) & 1), nz = iz + ((a >> 2) & 1);
                    for (int c = 0; c < 3; ++c) dof[3 * a + c] = sp.node_dof(nt, nth, nz, c);
                }
                for (int la = 0; la < 24; ++la)
                    for (int lbq = 0; lbq <= la; ++lbq) {
                        tg.emplace_back(dof[la], dof[lbq], Gl(la, lbq));
                        te.emplace_back(dof[la], dof[lbq], El(la, lbq));
                        tm.emplace_back(dof[la], dof[lbq], Ml(la, lbq));
                        if (la != lbq) {
                            tg.emplace_back(dof[lbq], dof[la], Gl(la, lbq));
                            te.emplace_back(dof[lbq], dof[la], El(la, lbq));
                            tm.emplace_back(dof[lbq], dof[la], Ml(la, lbq));
                        }
                    }
            }

    sp.grad_form.resize(dim, dim);
    sp.strain_form.resize(dim, dim);
    sp.mass_form.resize(dim, dim);
    sp.grad_form.setFromTriplets(tg.begin(), tg.end());
    sp.strain_form.setFromTriplets(te.begin(), te.end());
    sp.mass_form.setFromTriplets(tm.begin(), tm.end());
    sp.grad_form.makeCompressed();
    sp.strain_form.makeCompressed();
    sp.mass_form.makeCompressed();
    return sp;
}

VecX interpolate(const FieldSpace& sp, const ShellField& f) {
    const MidSurface& s = sp.domain.surface;
    const Real z1 = s.z_lower(0), z2 = s.z_upper(0);
    VecX out(sp.dim());
    for (int iz = 0; iz <= sp.n_z; ++iz)
        for (int ith = 0; ith <= sp.n_theta; ++ith)
            for (int it = 0; it <= sp.n_t; ++it) {
                const Real th = s.omega * ith / sp.n_theta;
                const Real z = z1 + (z2 - z1) * iz / sp.n_z;
                const Real g1 = sp.domain.g1(th, z), g2 = sp.domain.g2(th, z);
                const Real t = -g1 + (g1 + g2) * it / sp.n_t;
                const Vec3 u = f.value(t, th, z);
                for (int c = 0; c < 3; ++c) out[sp.node_dof(it, ith, iz, c)] = u[c];
            }
    return out;
}

Real rayleigh_ratio(const FieldSpace& sp, const VecX& v) {
    const Real num = v.dot(sp.grad_form * v);
    const Real den = v.dot(sp.mass_form * v) + v.dot(sp.strain_form * v);
    if (!(den > 0)) throw degenerate_field_error("rayleigh_ratio: zero field");
    return num / den;
}

Real span_projection_residual(const FieldSpace& sp, const VecX& nodal) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> ldlt(sp.mass_form);
    if (ldlt.info() != Eigen::Success)
        throw solver_error("span_projection_residual: mass form not factorizable");
    const VecX proj = ldlt.solve(sp.mass_form * nodal);
    const VecX diff = proj - nodal;
    const Real nn = nodal.dot(sp.mass_form * nodal);
    if (!(nn > 0)) throw degenerate_field_error("span_projection_residual: zero field");
    return std::sqrt(std::max<Real>(0, diff.dot(sp.mass_form * diff)) / nn);
}

Real korn2_constant_p2(const FieldSpace& sp, Real rel_tol) {
    const int dim = sp.dim();
    if (dim < 200) throw usage_error("korn2_constant_p2: space dimension must be >= 200");

    Eigen::SparseMatrix<Real> B = sp.mass_form + sp.strain_form;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> ldlt(B);
    if (ldlt.info() != Eigen::Success)
        throw solver_error("korn2_constant_p2: mass+strain form not factorizable");

    // Deterministic pseudo-random start.
    VecX v(dim);
    std::uint64_t state = 0x2545F4914F6CDD1DULL;
    for (int i = 0; i < dim; ++i) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        v[i] = static_cast<Real>(state % 10007) / 10007.0 - 0.5;
    }
    v.normalize();

    std::vector<Real> history;
    Real lambda = 0;
    int settled = 0;
    const int max_iter = 20000;
    bool converged = false;
    for (int k = 0; k < max_iter; ++k) {
        VecX y = ldlt.solve(sp.grad_form * v);
        const Real ny = y.norm();
        if (!(ny > 0)) break; // grad form annihilates v: restart not needed at desk scale
        v = y / ny;
        const Real num = v.dot(sp.grad_form * v);
        const Real den = v.dot(B * v);
        const Real next = num / den;
        history.push_back(next);
        if (std::abs(next - lambda) <= rel_tol * std::abs(next))
            ++settled;
        else
            settled = 0;
        lambda = next;
        if (settled >= 3) {
            converged = true;
            break;
        }
    }

    if (!converged) {
        if (dim <= 3000) {
            Eigen::GeneralizedSelfAdjointEigenSolver<MatX> ges(MatX(sp.grad_form), MatX(B));
            if (ges.info() == Eigen::Success) return ges.eigenvalues().maxCoeff();
        }
        std::ostringstream os;
        os << "korn2_constant_p2: power iteration stagnated; Ritz history tail:";
        for (std::size_t i = history.size() > 10 ? history.size() - 10 : 0; i < history.size(); ++i)
            os << " " << history[i];
        throw solver_error(os.str());
    }

    // Rayleigh-quotient polish; every quotient is a lower bound for the top
    // eigenvalue, so keep the best seen.
    Real best = lambda;
    VecX vp = v;
    for (int k = 0; k < 3; ++k) {
        Eigen::SparseMatrix<Real> S = sp.grad_form - best * B;
        Eigen::SparseLU<Eigen::SparseMatrix<Real>> lu(S);
        if (lu.info() != Eigen::Success) break; // shift hit the spectrum: done
        VecX y = lu.solve(B * vp);
        const Real ny = y.norm();
        if (!(ny > 0) || !y.allFinite()) break;
        vp = y / ny;
        const Real cand = vp.dot(sp.grad_form * vp) / vp.dot(B * vp);
        if (!(cand > best)) break;
        best = cand;
    }
    return best;
}

ScalingFit fit_scaling(const std::vector<std::pair<Real, Real>>& samples) {
    if (samples.size() < 3) throw usage_error("fit_scaling: need at least 3 samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& [h, C] = samples[i];
        if (!(h > 0) || !std::isfinite(h))
            throw usage_error("fit_scaling: sample " + std::to_string(i) + " has nonpositive h");
        if (!(C > 0) || !std::isfinite(C))
            throw usage_error("fit_scaling: sample " + std::to_string(i) + " has nonpositive C");
        for (std::size_t j = 0; j < i; ++j)
            if (samples[j].first == h)
                throw usage_error("fit_scaling: duplicate h in samples " + std::to_string(j) +
                                  " and " + std::to_string(i));
    }

    const std::size_t n = samples.size();
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [h, C] : samples) {
        const Real x = std::log(h), y = std::log(C);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const Real denom = n * sxx - sx * sx;
    const Real slope = (n * sxy - sx * sy) / denom;
    const Real intercept = (sy - slope * sx) / n;

    ScalingFit fit;
    fit.samples = samples;
    fit.alpha = -slope;
    fit.c = std::exp(intercept);
    Real ss = 0;
    for (const auto& [h, C] : samples) {
        const Real miss = std::log(C) - (intercept + slope * std::log(h));
        ss += miss * miss;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

Real NestedBoxPair::volume_ratio() const {
    Real r = 1;
    for (int ax = 0; ax < 3; ++ax)
        r *= static_cast<Real>(n1[ax] + pad_lo[ax] + pad_hi[ax]) / n1[ax];
    return r;
}

NestedBoxPair NestedBoxPair::rescaled(Real lambda) const {
    NestedBoxPair out = *this;
    out.lo *= lambda;
    out.hi *= lambda;
    return out;
}

namespace {

struct BoxGrid {
    Vec3 lo, cell;
    Eigen::Vector3i n;
    Real cell_volume() const { return cell[0] * cell[1] * cell[2]; }
};

template <class F>
Real box_lp_power(const BoxGrid& g, Real p, F&& f) {
    ArrayX terms(static_cast<Eigen::Index>(g.n[0]) * g.n[1] * g.n[2]);
    Eigen::Index c = 0;
    const Real w = g.cell_volume();
    for (int k = 0; k < g.n[2]; ++k)
        for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i, ++c) {
                const Vec3 x = g.lo + g.cell.cwiseProduct(Vec3(i + 0.5, j + 0.5, k + 0.5));
                const Real a = f(x);
                if (!std::isfinite(a)) {
                    std::ostringstream os;
                    os << "field not finite at box point (" << x.transpose() << ")";
                    throw evaluation_error(os.str());
                }
                terms[c] = w * std::pow(a, p);
            }
    return pairwise_sum(terms);
}

} // namespace

ExtensionResult extension_check(const NestedBoxPair& pair, const CartesianField& field, Real p) {
    if ((pair.pad_lo.array() < 0).any() || (pair.pad_hi.array() < 0).any() ||
        (pair.n1.array() < 1).any())
        throw usage_error("extension_check: invalid box pair");
    if (!(p > 1.0)) throw usage_error("extension_check: p must lie in (1, inf)");

    const BoxGrid inner{pair.lo, pair.cell(), pair.n1};
    const BoxGrid outer{pair.lo2(), pair.cell(), pair.n1 + pair.pad_lo + pair.pad_hi};

    auto grad_mag = [&](const Vec3& x) { return field.jacobian(x).norm(); };
    auto strain_mag = [&](const Vec3& x) { return strain(field.jacobian(x)).norm(); };

    ExtensionResult r;
    r.lhs = std::pow(box_lp_power(outer, p, grad_mag), 1.0 / p);
    r.grad_inner = std::pow(box_lp_power(inner, p, grad_mag), 1.0 / p);
    r.strain_outer = std::pow(box_lp_power(outer, p, strain_mag), 1.0 / p);
    r.rhs = r.grad_inner + r.strain_outer;
    return r;
}

SubdivisionReport subdivision_run(const ThinDomain& d, const ShellField& f, Real p,
                                  GridResolution base) {
    SubdivisionReport rep;
    rep.h = d.h;
    rep.p = p;
    const int N = static_cast<int>(1.0 / d.h) + 1;
    rep.N = N;

    // Cell counts multiples of N so piece boundaries align with cell edges.
    const int mul_th = std::max(1, (base.n_theta + N - 1) / N);
    const int mul_z = std::max(1, (base.n_z + N - 1) / N);
    GridResolution res{N * mul_th, N * mul_z, base.n_t};

    const QuadratureGrid full = make_quadrature(d, res);
    const QuadratureGrid shell = make_quadrature_band(d, res, -d.h, d.h);

    auto grad_mag = [&](Real t, Real th, Real z) { return eval_gradient(f, d, t, th, z).norm(); };
    auto strain_mag = [&](Real t, Real th, Real z) {
        return strain(eval_gradient(f, d, t, th, z)).norm();
    };

    // Per-cell contributions, grouped into pieces by the theta/z cell index.
    const Eigen::Index cells = full.cells();
    ArrayX grad_full(cells), strain_full(cells), grad_shell(cells);
    for (Eigen::Index c = 0; c < cells; ++c) {
        grad_full[c] = full.weight[c] * std::pow(grad_mag(full.t[c], full.theta[c], full.z[c]), p);
        strain_full[c] =
            full.weight[c] * std::pow(strain_mag(full.t[c], full.theta[c], full.z[c]), p);
        grad_shell[c] =
            shell.weight[c] * std::pow(grad_mag(shell.t[c], shell.theta[c], shell.z[c]), p);
    }

    rep.direct_grad_power = pairwise_sum(grad_full);
    const Real strain_power = pairwise_sum(strain_full);

    const int n_pieces = N * N;
    std::vector<Real> pg(n_pieces, 0.0), ps(n_pieces, 0.0), pgs(n_pieces, 0.0);
    for (int ith = 0; ith < res.n_theta; ++ith) {
        const int pi = ith / mul_th;
        for (int iz = 0; iz < res.n_z; ++iz) {
            const int pj = iz / mul_z;
            const int piece = pi * N + pj;
            for (int it = 0; it < full.n_t; ++it) {
                const Eigen::Index c = full.cell_index(ith, iz, it);
                pg[piece] += grad_full[c];
                ps[piece] += strain_full[c];
                pgs[piece] += grad_shell[c];
            }
        }
    }

    Real agg = 0;
    Real max_c = 0;
    for (int q = 0; q < n_pieces; ++q) {
        agg += pg[q];
        const Real lhs = std::pow(pg[q], 1.0 / p);
        const Real rhs = std::pow(pgs[q], 1.0 / p) + std::pow(ps[q], 1.0 / p);
        if (rhs > 0) max_c = std::max(max_c, lhs / rhs);
    }
    rep.aggregate_grad_power = agg;
    rep.additivity_gap = std::abs(agg - rep.direct_grad_power) /
                         (rep.direct_grad_power > 0 ? rep.direct_grad_power : 1.0);

    const Real lhs_tot = std::pow(rep.direct_grad_power, 1.0 / p);
    const Real rhs_tot = std::pow(pairwise_sum(grad_shell), 1.0 / p) + std::pow(strain_power, 1.0 / p);
    rep.aggregate_c_obs = rhs_tot > 0 ? lhs_tot / rhs_tot : 0;
    rep.max_piece_c_obs = max_c;
    return rep;
}

InterpolationConstant interpolation_constant(const ThinDomain& d, Real p,
                                             const std::vector<ShellField>& family,
                                             GridResolution res) {
    if (family.empty()) throw usage_error("interpolation_constant: empty field family");
    InterpolationConstant out;
    const QuadratureGrid g = make_quadrature(d, res);
    for (const ShellField& f : family) {
        try {
            const Real nu = lp_norm(g, p, [&](Real t, Real th, Real z) { return f.value(t, th, z); });
            const Real nut = lp_norm(g, p, [&](Real t, Real th, Real z) { return f.value(t, th, z)[0]; });
            const Real ng =
                lp_norm(g, p, [&](Real t, Real th, Real z) { return eval_gradient(f, d, t, th, z); });
            const Real ns = lp_norm(
                g, p, [&](Real t, Real th, Real z) { return strain(eval_gradient(f, d, t, th, z)); });
            const Real den = nut * ns / d.h + nu * nu + ns * ns;
            if (!(den > 0)) throw degenerate_field_error("zero field");
            out.value = std::max(out.value, ng * ng / den);
            ++out.used;
        } catch (const degenerate_field_error&) {
            ++out.skipped;
        }
    }
    if (out.used == 0)
        throw degenerate_field_error("interpolation_constant: every family member degenerate");
    return out;
}

std::vector<ShellField> default_field_family(const ThinDomain& d, std::uint64_t seed) {
    const MidSurface& s = d.surface;
    std::vector<ShellField> family;
    family.push_back(make_ansatz(default_bump_profile(s, d.h), d));
    std::mt19937_64 rng(seed ^ 0x5bf03635ULL);
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    for (int i = 0; i < 2; ++i) {
        Vec3 axis(u(rng), u(rng), u(rng));
        axis.normalize();
        const Vec3 center = s.point(s.omega / 2, s.z_mid()) + 0.2 * Vec3(u(rng), u(rng), u(rng));
        family.push_back(rigid_field(axis, center, d));
    }
    family.push_back(random_bump_field(d, seed + 1));
    family.push_back(random_bump_field(d, seed + 2));
    return family;
}

InterpolationConstant interpolation_constant(const ThinDomain& d, Real p, GridResolution res) {
    return interpolation_constant(d, p, default_field_family(d), res);
}

} // namespace kornlab
