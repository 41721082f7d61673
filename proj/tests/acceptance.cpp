// Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.
#include "phi4/besov.hpp"
#include "phi4/harness.hpp"
#include "phi4/toy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace phi4;

namespace {

int g_failures = 0;

void report(int idx, const char *what, bool ok, const std::string &detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", ok ? "PASS" : "FAIL", idx, what,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ReportRow *find_row(const Report &rep, const std::string &prefix) {
    for (const auto &r : rep.rows)
        if (r.name.rfind(prefix, 0) == 0) return &r;
    return nullptr;
}

// 1. toy series reference values
void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    ToyReport t = run_toy(0.01, 80);
    bool ok = std::abs(t.z_quad - 1.7597) < 1e-4 &&
              std::abs(t.terms[0] - 1.7725) < 5e-4 &&
              std::abs(t.terms[1] - (-0.0133)) < 5e-4 &&
              std::abs(t.terms[70]) >= 0.8 && std::abs(t.terms[70]) <= 1.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "Z=%.5f t0=%.5f t1=%.5f |t70|=%.3f, %.2fs", t.z_quad, t.terms[0],
                  t.terms[1], std::abs(t.terms[70]), elapsed_s(t0));
    report(1, "toy series values", ok, buf);
}

// 2. exact symbolic expansion structure
void criterion2() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string why = "ok";

    Expansion e21 = expand(2, 1);
    if (e21.f_terms[0].size() != 1 || e21.f_terms[0][0].coeff != Rational(1) ||
        e21.f_terms[0][0].graph.interior_count() != 0 ||
        e21.f_terms[0][0].graph.edges().size() != 1 || !e21.f_terms[1].empty()) {
        ok = false;
        why = "expand(2,1) structure";
    }

    Expansion e22 = expand(2, 2);
    if (ok) {
        if (e22.f_terms[2].size() != 1 || e22.f_terms[2][0].coeff != Rational(6)) {
            ok = false;
            why = "expand(2,2) sunset coefficient";
        } else {
            const IbpGraph &g = e22.f_terms[2][0].graph;
            int triple = 0;
            for (const auto &ed : g.edges())
                if (!g.is_boundary(ed.u) && !g.is_boundary(ed.v)) ++triple;
            if (g.interior_count() != 2 || triple != 3 || g.n_phi() != 0) {
                ok = false;
                why = "expand(2,2) sunset shape";
            }
        }
    }

    Expansion e41 = expand(4, 1);
    if (ok) {
        if (e41.f_terms[1].size() != 1 || e41.f_terms[1][0].coeff != Rational(-6)) {
            ok = false;
            why = "expand(4,1) star coefficient";
        } else {
            const IbpGraph &g = e41.f_terms[1][0].graph;
            bool star = g.interior_count() == 1 && g.edges().size() == 4;
            for (int b = 0; star && b < 4; ++b) star = g.degree(b) == 1;
            if (!star) {
                ok = false;
                why = "expand(4,1) star shape";
            }
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s, %.2fs", why.c_str(), elapsed_s(t0));
    report(2, "exact expansion coefficients", ok, buf);
}

// 3. Green-function delta identity
void criterion3() {
    auto t0 = std::chrono::steady_clock::now();
    double worst_rel = 0;
    for (double M : {4.0, 8.0, 16.0})
        for (double eps : {1.0, 0.5})
            for (double m : {0.5, 1.0, 2.0}) {
                TorusLattice lat(M, eps, m);
                Field lap = discrete_laplacian(lat.green());
                double ie2 = 1.0 / (eps * eps), w = 0;
                for (std::size_t i = 0; i < lat.n_sites(); ++i) {
                    double v =
                        2.0 * (m * lat.green()[i] - lap[i]) - (i == 0 ? ie2 : 0.0);
                    w = std::max(w, std::abs(v));
                }
                worst_rel = std::max(worst_rel, w / ie2);
            }
    char buf[128];
    std::snprintf(buf, sizeof buf, "worst residual %.3e eps^-2, %.2fs", worst_rel,
                  elapsed_s(t0));
    report(3, "Green delta identity", worst_rel < 1e-10, buf);
}

// 4. quadrature-oracle identity battery
void criterion4() {
    auto t0 = std::chrono::steady_clock::now();
    Report rep = run_oracle_suite({0.05, 0.1, 0.2});
    double worst = 0;
    for (const auto &r : rep.rows) worst = std::max(worst, r.value);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu identities, worst residual %.3e, %.1fs",
                  rep.rows.size(), worst, elapsed_s(t0));
    report(4, "oracle identity battery", rep.passed() && worst < 1e-6, buf);
}

// 5. asymptoticity slopes on the noise-free oracle
void criterion5() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec;
    spec.M = 2;
    spec.eps = 1;
    spec.m = 1;
    spec.lambda_grid = {0.02, 0.05, 0.1, 0.2};
    spec.output_dir = "";

    spec.N = 0;
    Report r0 = run_asymptoticity(spec);
    const ReportRow *s0 = find_row(r0, "slope");
    spec.N = 2;
    Report r2 = run_asymptoticity(spec);
    const ReportRow *s2 = find_row(r2, "slope");
    bool ok0 = s0 && s0->value >= 1.7 && s0->value <= 2.3;
    bool ok2 = s2 && s2->value >= 2.7;
    char buf[128];
    std::snprintf(buf, sizeof buf, "slope(N=0)=%.3f slope(N=2)=%.3f, %.1fs",
                  s0 ? s0->value : -1.0, s2 ? s2->value : -1.0, elapsed_s(t0));
    report(5, "remainder asymptoticity", ok0 && ok2, buf);
}

// 6. free-field Monte Carlo against the exact covariance
void criterion6() {
    auto t0 = std::chrono::steady_clock::now();
    TorusLattice lat(16.0, 1.0, 1.0);
    SimConfig cfg;
    cfg.lattice = &lat;
    cfg.lambda = 0.0;
    cfg.dt = 2.0; // exact OU step: large dt just decorrelates faster
    cfg.burn_in = 200;
    cfg.n_samples = 20000;
    cfg.thinning = 2;
    cfg.seed = 2024;
    cfg.n_batches = 16;
    MeasurementSet ms = run_chain(cfg);
    Field s2 = ms.s2_mean(), se = ms.s2_stderr();
    std::size_t within = 0;
    for (std::size_t r = 0; r < lat.n_sites(); ++r)
        if (std::abs(s2[r] - lat.green()[r]) <= 3.0 * se[r]) ++within;
    double frac = double(within) / double(lat.n_sites());
    MeanErr p1 = ms.scalar(ms.phi_batch), p3 = ms.scalar(ms.phi3_batch);
    bool odd_ok = std::abs(p1.mean) <= 3.0 * p1.stderr_ && std::abs(p3.mean) <= 3.0 * p3.stderr_;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "S2 within 3se at %.1f%% of separations, |phi|=%.1e(3se=%.1e), %.1fs",
                  100.0 * frac, std::abs(p1.mean), 3.0 * p1.stderr_, elapsed_s(t0));
    report(6, "free-field Monte Carlo", frac >= 0.95 && odd_ok, buf);
}

// 7. two-point short-distance property checks
void criterion7() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec;
    spec.kind = "two_point";
    spec.M = 16;
    spec.eps = 1;
    spec.m = 1;
    spec.lambda_grid = {0.05, 0.1, 0.2};
    spec.gamma = 0.5;
    spec.dt = 0.1; // integrator bias is O(dt^2) and must stay below the lambda^2 signal
    spec.burn_in = 5000;
    spec.n_samples = 120000;
    spec.thinning = 5;
    spec.seed = 11;
    spec.n_batches = 16;
    spec.threads = 3;
    spec.output_dir = "";
    Report rep = run_two_point(spec);
    const ReportRow *spread = find_row(rep, "ratio_spread");
    const ReportRow *pw = find_row(rep, "pointwise_r0_dev");
    bool ok = spread && pw && spread->value < 1.5 && pw->pass;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "norm/lambda^2 spread %.3f, r=0 dev %.2e (3se=%.2e), %.0fs",
                  spread ? spread->value : -1.0, pw ? pw->value : -1.0,
                  pw ? 3.0 * pw->err : -1.0, elapsed_s(t0));
    report(7, "two-point short distance", ok, buf);
}

// 8. connected four-point property checks
void criterion8() {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentSpec spec;
    spec.kind = "four_point";
    spec.M = 8;
    spec.eps = 1;
    spec.m = 1;
    spec.lambda_grid = {0.05, 0.1, 0.2};
    // the corrected term is O(lambda^2) ~ 2.4e-4 * lambda^2; resolving it at
    // lambda=0.05 needs the O(dt^2) integrator bias and the stderr both below
    // ~1e-7, hence the small dt and the long, heavily thinned chain
    spec.dt = 0.0125;
    spec.burn_in = 5000;
    spec.n_samples = 4400000;
    spec.thinning = 20;
    spec.seed = 13;
    spec.n_batches = 16;
    spec.threads = 3;
    spec.output_dir = "";
    Report rep = run_four_point(spec);
    const ReportRow *u4_01 = find_row(rep, "U4_lam0.100000");
    const ReportRow *sp1 = find_row(rep, "absU4_over_lam_spread");
    const ReportRow *sp2 = find_row(rep, "corrected_over_lam2_spread");
    bool neg = u4_01 && u4_01->value < 0 && std::abs(u4_01->value) > 3.0 * u4_01->err;
    bool ok = neg && sp1 && sp2 && sp1->value < 1.5 && sp2->value < 2.0;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "U4(0.1)=%.3e(se=%.1e), |U4|/lam spread %.3f, corrected spread %.3f, %.0fs",
                  u4_01 ? u4_01->value : 0.0, u4_01 ? u4_01->err : 0.0,
                  sp1 ? sp1->value : -1.0, sp2 ? sp2->value : -1.0, elapsed_s(t0));
    report(8, "connected four-point", ok, buf);
}

// 9. Besov reconstruction and plane-wave scaling
void criterion9() {
    auto t0 = std::chrono::steady_clock::now();
    TorusLattice lat(1.0, 1.0 / 256.0, 1.0);
    DyadicPartition part(lat);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    Field f(lat);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = n01(rng);
    std::vector<Field> blocks = lp_blocks(f, part);
    double rec = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double s = 0;
        for (const Field &b : blocks) s += b[i];
        rec = std::max(rec, std::abs(s - f[i]));
    }
    bool scal_ok = true;
    double worst_ratio = 1;
    const int n = lat.n();
    for (double alpha : {-1.0, -0.5, 0.5})
        for (int j : {1, 2, 3, 4, 5}) {
            Field w(lat);
            int k = 1 << j;
            for (int iy = 0; iy < n; ++iy)
                for (int ix = 0; ix < n; ++ix)
                    w.at(ix, iy) = std::cos(2.0 * std::numbers::pi * k * ix / n);
            double norm = besov_norm(w, alpha, kInfinity, kInfinity);
            double ratio = norm / std::pow(2.0, alpha * j);
            worst_ratio = std::max(worst_ratio, std::max(ratio, 1.0 / ratio));
            if (ratio <= 0.25 || ratio >= 4.0) scal_ok = false;
        }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "reconstruction %.2e, worst scaling ratio %.2f, %.1fs", rec,
                  worst_ratio, elapsed_s(t0));
    report(9, "Besov reconstruction and scaling", rec < 1e-10 && scal_ok, buf);
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures) std::printf("%d criterion(s) FAILED\n", g_failures);
    else std::printf("all 9 criteria passed\n");
    return g_failures ? 1 : 0;
}
