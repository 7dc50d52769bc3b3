// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its own runtime budget.

#include "kornlab/ansatz.hpp"
#include "kornlab/csv.hpp"
#include "kornlab/experiments.hpp"
#include "kornlab/harmonic2d.hpp"
#include "kornlab/korn_constants.hpp"
#include "kornlab/quadrature.hpp"
#include "kornlab/shell_field.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace kornlab;
namespace kt = kornlab::testing;

namespace {

int failures = 0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

template <class Fn>
void criterion(int id, const std::string& name, Real budget_s, Fn&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        body(out);
    } catch (const std::exception& e) {
        out.pass = false;
        out.note(std::string("exception: ") + e.what());
    }
    const Real secs = std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= budget_s) {
        out.pass = false;
        out.note("runtime budget exceeded");
    }
    std::printf("[%s] criterion %d: %s (%s) [%.1f s / %.0f s]\n", out.pass ? "PASS" : "FAIL", id,
                name.c_str(), out.detail.empty() ? "ok" : out.detail.c_str(), secs, budget_s);
    std::fflush(stdout);
    if (!out.pass) ++failures;
}

struct NamedSurface {
    std::string name;
    MidSurface s;
};

std::vector<NamedSurface> acceptance_surfaces() {
    return {
        {"plate", make_surface(SurfaceKind::plate, {{"Lx", 1.0}, {"Ly", 1.0}})},
        {"cylinder",
         make_surface(SurfaceKind::cylinder, {{"R", 1.0}, {"length", 0.6}, {"omega", 0.6}})},
        {"sphere_cap", make_surface(SurfaceKind::sphere_cap, {{"R", 1.0},
                                                              {"polar_min", 0.3},
                                                              {"polar_max", 0.9},
                                                              {"omega", 0.6}})},
        {"catenoid",
         make_surface(SurfaceKind::catenoid, {{"z_min", -0.25}, {"z_max", 0.25}, {"omega", 0.5}})},
    };
}

Real strain_to_grad_ratio(const ThinDomain& d, const ShellField& f, GridResolution res) {
    const QuadratureGrid g = make_quadrature(d, res);
    Real num = 0, den = 0;
    for (Eigen::Index c = 0; c < g.cells(); ++c) {
        const Mat3 G = eval_gradient(f, d, g.t[c], g.theta[c], g.z[c]);
        num += g.weight[c] * strain(G).squaredNorm();
        den += g.weight[c] * G.squaredNorm();
    }
    return std::sqrt(num / den);
}

void criterion1(Outcome& out) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    Real worst_base = 0, worst_shrink = std::numeric_limits<Real>::infinity();
    for (const auto& [name, s] : acceptance_surfaces()) {
        const ThinDomain d = make_thin_domain(s, 0.02, ThicknessProfile::constant, 2.0, 1.0);
        for (int rep = 0; rep < 5; ++rep) {
            Vec3 axis(u(rng), u(rng), u(rng));
            axis.normalize();
            const Vec3 center =
                s.point(s.omega / 2, s.z_mid()) + 0.25 * Vec3(u(rng), u(rng), u(rng));
            const GridResolution base{64, 64, 8};
            const Real r1 = strain_to_grad_ratio(d, rigid_field(axis, center, d, base), base);
            const Real r2 = strain_to_grad_ratio(d, rigid_field(axis, center, d, base.doubled()),
                                                 base.doubled());
            worst_base = std::max(worst_base, r1);
            out.require(r1 <= 1e-5, name + ": strain/grad ratio " + format_real(r1) + " > 1e-5");
            if (r1 > 1e-12) { // above the roundoff floor the decay must show
                worst_shrink = std::min(worst_shrink, r1 / r2);
                out.require(r2 <= r1 / 3.0,
                            name + ": ratio shrank only " + format_real(r1 / r2) + "x");
            }
        }
    }
    out.note("worst ratio " + format_real(worst_base) + ", worst shrink " +
             format_real(worst_shrink) + "x");
}

void criterion2(Outcome& out) {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<Real> u01(0.03, 0.97);
    Real worst = 0;
    for (const auto& [name, s] : acceptance_surfaces()) {
        const ThinDomain d = make_thin_domain(s, 0.02, ThicknessProfile::constant, 2.0, 1.0);
        int checked = 0;
        for (int fi = 0; fi < 4; ++fi) {
            const ShellField f = random_bump_field(d, 1000 + fi);
            for (int q = 0; q < 250; ++q) {
                const Real th = s.omega * u01(rng);
                const Real z1 = s.z_lower(th), z2 = s.z_upper(th);
                const Real z = z1 + (z2 - z1) * u01(rng);
                const Real t = -d.g1(th, z) + (d.g1(th, z) + d.g2(th, z)) * u01(rng);
                const Mat3 A = eval_gradient(f, d, t, th, z);
                const Mat3 B = kt::cartesian_fd_gradient(f, s, t, th, z);
                const Real rel = (A - B).norm() / A.norm();
                worst = std::max(worst, rel);
                ++checked;
            }
        }
        out.require(checked == 1000, name + ": expected 1000 points");
    }
    out.require(worst <= 1e-4, "worst relative deviation " + format_real(worst));
    out.note("worst relative deviation " + format_real(worst) + " over 4x1000 points");
}

void criterion3(Outcome& out) {
    const std::vector<Real> ladder{1e-1, 5e-2, 2.5e-2, 1.25e-2};
    const std::vector<NamedSurface> surfaces = {
        {"plate", make_surface(SurfaceKind::plate, {{"Lx", 1.0}, {"Ly", 1.0}})},
        {"cylinder", make_surface(SurfaceKind::cylinder, {{"R", 1.0}, {"length", 1.0}})}};
    Real worst_spread = 0;
    for (const auto& [name, s] : surfaces) {
        const AnsatzProfile pr = default_bump_profile(s, ladder.front());
        for (Real p : {1.5, 2.0, 3.0}) {
            const auto reports =
                sharpness_sweep(pr, s, ThicknessProfile::constant, 2.0, 1.0, p, ladder);
            Real ilo = reports[0].interpolation_ratio, ihi = ilo;
            Real slo = reports[0].second_ratio, shi = slo;
            for (const RatioReport& r : reports) {
                ilo = std::min(ilo, r.interpolation_ratio);
                ihi = std::max(ihi, r.interpolation_ratio);
                slo = std::min(slo, r.second_ratio);
                shi = std::max(shi, r.second_ratio);
            }
            std::ostringstream tag;
            tag << name << " p=" << p;
            out.require(ilo > 0 && ihi / ilo <= 4.0,
                        tag.str() + ": interpolation spread " + format_real(ihi / ilo));
            out.require(slo > 0 && shi / slo <= 4.0,
                        tag.str() + ": second-ratio spread " + format_real(shi / slo));
            worst_spread = std::max({worst_spread, ihi / ilo, shi / slo});
        }
    }
    out.note("worst band spread " + format_real(worst_spread) + " (cap 4)");
}

void criterion4(Outcome& out) {
    const MidSurface s = make_surface(SurfaceKind::plate, {{"Lx", 1.0}, {"Ly", 1.0}});
    std::vector<std::pair<Real, Real>> samples;
    int dim = 0;
    for (Real h : {1e-1, 5e-2, 2.5e-2, 1.25e-2}) {
        const ThinDomain d = make_thin_domain(s, h, ThicknessProfile::constant, 2.0, 1.0);
        const FieldSpace sp = make_field_space(d, 2, 96, 2);
        dim = sp.dim();
        out.require(sp.dim() <= 3000, "space dimension exceeds 3000");
        samples.emplace_back(h, korn2_constant_p2(sp));
    }
    const ScalingFit fit = fit_scaling(samples);
    out.require(fit.alpha >= 0.7 && fit.alpha <= 1.3,
                "fitted exponent " + format_real(fit.alpha) + " outside [0.7, 1.3]");
    out.require(fit.residual <= 0.15, "log-log residual " + format_real(fit.residual) + " > 0.15");
    out.note("alpha " + format_real(fit.alpha) + ", residual " + format_real(fit.residual) +
             ", dim " + std::to_string(dim));
}

void criterion5(Outcome& out) {
    nlohmann::json j;
    j["experiment"] = "lemma44_sweep";
    j["seed"] = 7;
    ExperimentConfig cfg = config_from_json(j);
    cfg.out_dir = (std::filesystem::temp_directory_path() / "kornlab_acc_c5").string();
    const RunReport rep = run(cfg);
    for (const auto& a : rep.assertions)
        out.require(a.pass, a.name + " (" + a.detail + ")");
    out.note("closed-form anchor and 100 random trigonometric cases");
}

void criterion6(Outcome& out) {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<Real> amp(0.8, 1.2), phase(0.0, 2 * M_PI), quad(-0.3, 0.3);
    const ThinDomain2D d = make_thin_domain_2d(1.0, 0.01, Profile2DKind::constant, 2.0, 1.0);
    Real worst = 0, worst_shrink = std::numeric_limits<Real>::infinity();
    for (int m = 0; m < 10; ++m) {
        const Real a = amp(rng), ph = phase(rng), q = quad(rng);
        auto data = [=](Real x, Real y) {
            return a * std::cos(M_PI * y + ph) * std::cosh(M_PI * x) + q * (x * x - y * y);
        };
        auto sup_errors = [&](int ns, int ny) {
            const auto sol = solve_harmonic(d, data, ns, ny);
            const NodalField2D W = conjugate_field(sol);
            Real e12 = 0, dev = 0;
            for (int jj = 0; jj <= W.grid.n_y; ++jj)
                for (int ii = 0; ii <= W.grid.n_s; ++ii) {
                    e12 = std::max(e12, std::abs(0.5 * (W.j12(ii, jj) + W.j21(ii, jj))));
                    dev = std::max(dev, std::abs(W.j11(ii, jj) - W.j22(ii, jj)));
                }
            return std::pair{e12, dev};
        };
        const auto [e1, d1] = sup_errors(16, 256);
        const auto [e2, d2] = sup_errors(32, 512);
        worst = std::max({worst, e1, d1});
        out.require(e1 <= 1e-3 && d1 <= 1e-3,
                    "solution " + std::to_string(m) + ": base errors " + format_real(e1) + ", " +
                        format_real(d1));
        for (auto [base, fine] : {std::pair{e1, e2}, std::pair{d1, d2}})
            if (base > 1e-12) {
                worst_shrink = std::min(worst_shrink, base / fine);
                out.require(fine <= base / 3.0, "solution " + std::to_string(m) +
                                                    ": shrink only " + format_real(base / fine));
            }
    }
    out.note("worst identity error " + format_real(worst) + ", worst shrink " +
             format_real(worst_shrink) + "x");
}

void criterion7(Outcome& out) {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<Real> amp(0.8, 1.2), phase(0.0, 2 * M_PI), quad(-0.3, 0.3);
    std::vector<std::function<Real(Real, Real)>> family;
    for (int m = 0; m < 6; ++m) {
        const Real a = amp(rng), ph = phase(rng), q = quad(rng);
        family.push_back([=](Real x, Real y) {
            return a * std::cos(M_PI * y + ph) * std::cosh(M_PI * x) + q * (x * x - y * y);
        });
    }
    std::vector<Real> c41, c42;
    for (Real h : {1e-1, 5e-2, 2e-2, 1e-2}) {
        const ThinDomain2D d = make_thin_domain_2d(1.0, h, Profile2DKind::constant, 2.0, 1.0);
        for (const auto& data : family) {
            const auto sol = solve_harmonic(d, data, 16, 256);
            const Lemma41Result r41 = check_lemma41(sol, 2.0);
            if (!r41.kernel) c41.push_back(r41.lhs / r41.rhs_factor);
            c42.push_back(check_lemma42(sol, 2.0));
        }
    }
    auto spread_vs_median = [](std::vector<Real> v) {
        std::sort(v.begin(), v.end());
        const Real med = v[v.size() / 2];
        Real worst = 1;
        for (Real x : v) worst = std::max({worst, x / med, med / x});
        return worst;
    };
    const Real s41 = spread_vs_median(c41), s42 = spread_vs_median(c42);
    out.require(c41.size() == 24, "expected 24 non-kernel cases for the shifted bound");
    out.require(s41 <= 4.0, "shifted-derivative constants spread " + format_real(s41));
    out.require(s42 <= 4.0, "interpolation constants spread " + format_real(s42));
    out.note("spreads vs median: " + format_real(s41) + " and " + format_real(s42) + " (cap 4)");
}

void criterion8(Outcome& out) {
    const MidSurface s = make_surface(SurfaceKind::plate, {{"Lx", 1.0}, {"Ly", 1.0}});
    std::vector<Real> aggs;
    Real worst_gap = 0;
    int idx = 0;
    for (Real h : {1e-1, 5e-2, 2.5e-2, 1.25e-2}) {
        const ThinDomain d = make_thin_domain(s, h, ThicknessProfile::tilted, 2.0, 1.0);
        const ShellField f = random_bump_field(d, 800 + idx++);
        const SubdivisionReport rep = subdivision_run(d, f, 2.0, {64, 64, 8});
        worst_gap = std::max(worst_gap, rep.additivity_gap);
        out.require(rep.additivity_gap <= 1e-10,
                    "additivity gap " + format_real(rep.additivity_gap) + " at h " + format_real(h));
        aggs.push_back(rep.aggregate_c_obs);
    }
    const Real lo = *std::min_element(aggs.begin(), aggs.end());
    const Real hi = *std::max_element(aggs.begin(), aggs.end());
    out.require(lo > 0 && hi / lo <= 2.0, "aggregate constants spread " + format_real(hi / lo));
    out.note("worst additivity gap " + format_real(worst_gap) + ", constant band spread " +
             format_real(hi / lo));
}

void criterion9(Outcome& out) {
    namespace fs = std::filesystem;
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
    };
    for (const std::string exp : {"lemma44_sweep", "extension"}) {
        nlohmann::json j;
        j["experiment"] = exp;
        j["seed"] = 7;
        ExperimentConfig a = config_from_json(j);
        a.out_dir = (fs::temp_directory_path() / ("kornlab_acc_c9a_" + exp)).string();
        ExperimentConfig b = config_from_json(j);
        b.out_dir = (fs::temp_directory_path() / ("kornlab_acc_c9b_" + exp)).string();
        b.threads = 3;
        run(a);
        run(b);
        const std::string fa = slurp(fs::path(a.out_dir) / (exp + "_results.csv"));
        const std::string fb = slurp(fs::path(b.out_dir) / (exp + "_results.csv"));
        out.require(!fa.empty() && fa == fb, exp + ": reruns differ");
    }
    out.note("reruns (including a threaded one) byte-identical");
}

} // namespace

int main() {
    std::printf("acceptance suite: thin-domain inequality laboratory\n");
    criterion(1, "rigid kernel: strain/gradient ratio small and shrinking", 30, criterion1);
    criterion(2, "gradient formula vs Cartesian finite differences", 10, criterion2);
    criterion(3, "saturating-field ratio bands on plate and cylinder", 300, criterion3);
    criterion(4, "p=2 second-inequality constant scales like 1/h", 600, criterion4);
    criterion(5, "1D tail-vs-head inequality sweep", 20, criterion5);
    criterion(6, "conjugate-field identity under refinement", 60, criterion6);
    criterion(7, "planar constants uniform over the thickness ladder", 180, criterion7);
    criterion(8, "subdivision additivity and aggregate constants", 120, criterion8);
    criterion(9, "determinism: byte-identical reruns", 60, criterion9);
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures == 0 ? 0 : 1;
}
