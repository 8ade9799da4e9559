// Acceptance harness: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are stated inline next to each check.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qprobe/attack.hpp"
#include "qprobe/runner.hpp"
#include "qprobe/verify.hpp"

using namespace qprobe;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_s() {
    using clock = std::chrono::steady_clock;
    static const auto t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / double(n - 1));
    return out;
}

std::vector<Operator> random_povm(oracles::SplitMix& rng, int dim, int n) {
    std::vector<Matrix> parts(n);
    Matrix sum = Matrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        const Matrix g = rng.random_matrix(dim);
        parts[i] = g.adjoint() * g;
        sum += parts[i];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(sum);
    Matrix isq = Matrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
        isq += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint() /
               std::sqrt(std::max(es.eigenvalues()[i], 1e-14));
    std::vector<Operator> povm;
    for (int i = 0; i < n; ++i) povm.push_back(Operator(isq * parts[i] * isq));
    return povm;
}

// --- criterion 1: exact moment matrices of states are PSD ------------------

Outcome criterion_positivity() {
    oracles::SplitMix rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int da = 2 + int(rng.next() % 2);   // 2..3
        const int db = 2 + int(rng.next() % 3);   // 2..4
        DensityMatrix rho(rng.random_density(da * db));
        std::vector<Matrix> a_ops, b_ops;
        const int na = 2 + int(rng.next() % 2), nb = 2 + int(rng.next() % 2);
        for (int i = 0; i < na; ++i) a_ops.push_back(rng.random_matrix(da));
        for (int i = 0; i < nb; ++i) b_ops.push_back(rng.random_matrix(db));
        const double lm = min_eig(evm_exact(rho, a_ops, b_ops));
        worst = std::min(worst, lm);
    }
    return {worst >= -1e-9, "200 fuzzed moment matrices, min eigenvalue " + fmt(worst)};
}

// --- criterion 2: no EB strategy is ever flagged quantum -------------------

Outcome criterion_soundness() {
    oracles::SplitMix rng(2002);
    int false_pos = 0, total = 0;
    std::ostringstream first_fail;

    auto record = [&](Verdict v, const std::string& what) {
        ++total;
        if (v == Verdict::quantum) {
            if (!false_pos) first_fail << " first: " << what;
            ++false_pos;
        }
    };

    FockSpace space{16};
    // squeezed scenario: Helstrom and random POVMs with squeezed re-preparations
    for (int trial = 0; trial < 40; ++trial) {
        const double r = 0.3 + 0.2 * double(trial % 3);
        const double nbar = (trial % 2) ? 0.2 : 0.0;
        GaussianParams gp;
        gp.r = r;
        gp.nbar = nbar;
        const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
        EbStrategy st;
        if (trial % 2 == 0) {
            st = helstrom_povm(sc.ensemble.states[0], sc.ensemble.states[1]);
            st.squeezings = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)};
        } else {
            const int n = 2 + int(rng.next() % 2);
            st.povm = random_povm(rng, space.dim(), n);
            for (int i = 0; i < n; ++i) st.squeezings.push_back(rng.uniform(-0.8, 0.8));
        }
        st.validate();
        const MeasuredMoments mm =
            simulate_eb_cv(st, sc.ensemble.states[0], sc.ensemble.states[1]);
        const auto res = feasibility(template_squeezed(mm, std::abs(sc.source.overlap)));
        record(res.verdict, "squeezed trial " + std::to_string(trial));
    }

    // displaced scenario: random POVMs with coherent re-preparations
    auto [x, p] = quadratures(space);
    const Matrix xx = x.mat() * x.mat(), pp = p.mat() * p.mat();
    for (int trial = 0; trial < 30; ++trial) {
        GaussianParams gp;
        gp.alpha = (trial % 2) ? 0.6 : 0.4;
        gp.nbar = (trial % 3) ? 0.2 : 0.0;
        const CvScenario sc = cv_ensemble(CvKind::displaced, gp, space);
        const int n = 2 + int(rng.next() % 2);
        const auto povm = random_povm(rng, space.dim(), n);
        std::vector<Vector> repreps;
        for (int i = 0; i < n; ++i)
            repreps.push_back(coherent_state(space, rng.uniform(-0.9, 0.9)));
        DisplacedMoments dm;
        for (int k = 0; k < 2; ++k) {
            Matrix out = Matrix::Zero(space.dim(), space.dim());
            for (int i = 0; i < n; ++i) {
                const double q =
                    (sc.ensemble.states[k].mat() * povm[i].mat()).trace().real();
                out += q * (repreps[i] * repreps[i].adjoint());
            }
            const double mx = (out * x.mat()).trace().real();
            const double mp = (out * p.mat()).trace().real();
            const double vx = (out * xx).trace().real() - mx * mx;
            const double vp = (out * pp).trace().real() - mp * mp;
            if (k == 0) dm = DisplacedMoments{mx, mp, vx, vp, 0, 0, 0.5, 0.5};
            else {
                dm.mean_x1 = mx;
                dm.mean_p1 = mp;
                dm.var_x1 = vx;
                dm.var_p1 = vp;
            }
        }
        const auto res = feasibility(template_displaced(dm, std::abs(sc.source.overlap)));
        record(res.verdict, "displaced trial " + std::to_string(trial));
    }

    // qubit scenario: optimized thresholds and random strategies
    for (int trial = 0; trial < 30; ++trial) {
        const double theta = rng.uniform(0.3, M_PI / 2);
        const double phi = rng.uniform(0.0, M_PI / 2);
        const QubitScenario sc = qubit_ensemble(theta, phi);
        EbStrategy st;
        if (trial % 2 == 0) {
            st = qubit_eb_threshold(theta, phi).strategy;
        } else {
            const int n = 2 + int(rng.next() % 2);
            st.povm = random_povm(rng, 2, n);
            for (int i = 0; i < n; ++i) st.qubit_repreps.push_back(rng.random_pure(2));
        }
        const auto outs = simulate_eb_qubit(st, sc.ensemble);
        const auto res =
            feasibility(template_qubit(outs[0], outs[1], sc.source, false));
        record(res.verdict, "qubit trial " + std::to_string(trial));
    }

    return {false_pos == 0, std::to_string(total) + " strategies, " +
                                std::to_string(false_pos) + " false positives" +
                                first_fail.str()};
}

// --- criteria 3/4/8 share the squeezed boundary machinery -------------------

// First probed Var_x where the boundary is flat at the fidelity floor.  Pure
// state pairs reach the floor exactly at a finite junction; mixed pairs only
// approach it asymptotically (the dual multiplier stays positive for every
// finite constraint), so accept a dual gap below 1e-4 as "flat".
double flat_region_onset(const DensityMatrix& r0, const DensityMatrix& r1,
                         const std::vector<double>& probe) {
    const ClassicalBoundary cb = lagrange_boundary(r0, r1, probe);
    for (size_t i = 0; i < probe.size(); ++i)
        if (cb.region_b[i] || cb.var_p[i] - cb.region_b_level <= 1e-4) return probe[i];
    return probe.back();
}

Outcome criterion_floor() {
    FockSpace space{16};
    double worst = 0.0;
    std::string worst_at;
    for (double r : {0.3, 0.6}) {
        for (double nbar : {0.0, 0.2, 0.5}) {
            GaussianParams gp;
            gp.r = r;
            gp.nbar = nbar;
            const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
            const double floor =
                fidelity_floor(sc.ensemble.states[0], sc.ensemble.states[1]);
            const double onset = flat_region_onset(sc.ensemble.states[0],
                                                sc.ensemble.states[1],
                                                {0.8, 1.2, 1.8, 2.5, 3.5, 5.0, 7.0});
            const BoundaryCurve curve = boundary_scan_squeezed(
                r, nbar, {onset * 1.1, onset * 1.4}, 0, space);
            const double vmin = std::min(curve.var_p[0], curve.var_p[1]);
            const double gap = std::abs(vmin - floor);
            if (gap > worst) {
                worst = gap;
                worst_at = "(r=" + fmt(r) + ", nbar=" + fmt(nbar) + ")";
            }
        }
    }
    return {worst <= 2e-3,
            "max |boundary minimum - F/2| = " + fmt(worst) + " at " + worst_at};
}

Outcome criterion_pure_tightness() {
    FockSpace space{16};
    const double r = 0.5;
    GaussianParams gp;
    gp.r = r;
    const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
    const double floor = fidelity_floor(sc.ensemble.states[0], sc.ensemble.states[1]);
    const double onset = flat_region_onset(
        sc.ensemble.states[0], sc.ensemble.states[1], linspace(0.6, 1.6, 11));
    const std::vector<double> grid = linspace(onset, 2.0, 8);
    const BoundaryCurve curve = boundary_scan_squeezed(r, 0.0, grid, 0, space);
    double max_gap = 0.0, max_slope = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        max_gap = std::max(max_gap, std::abs(curve.var_p[i] - floor));
        if (i)
            max_slope = std::max(max_slope, std::abs(curve.var_p[i] - curve.var_p[i - 1]) /
                                                (grid[i] - grid[i - 1]));
    }
    return {max_gap <= 2e-3 && max_slope <= 1e-2,
            "max |verify - attack| = " + fmt(max_gap) + ", max slope = " + fmt(max_slope) +
                " over Var_x in [" + fmt(onset) + ", 2.0]"};
}

// --- criteria 5/6: qubit scenario -------------------------------------------

Outcome criterion_qubit_purifications(std::vector<double>& base_out) {
    const std::vector<double> thetas{M_PI / 6, M_PI / 4, M_PI / 3};
    double worst = 0.0;
    std::string what = "optimal";
    for (double theta : thetas) {
        const double base = boundary_scan_qubit({theta}, 0.0, QubitMode::naive).p_max[0];
        base_out.push_back(base);
        for (double phi : {M_PI / 4, M_PI / 2}) {
            const double opt =
                boundary_scan_qubit({theta}, phi, QubitMode::optimal).p_max[0];
            if (std::abs(opt - base) > worst) {
                worst = std::abs(opt - base);
                what = "optimal, theta=" + fmt(theta) + ", phi=" + fmt(phi);
            }
        }
        const double withc =
            boundary_scan_qubit({theta}, M_PI / 4, QubitMode::optimal_with_c).p_max[0];
        if (std::abs(withc - base) > worst) {
            worst = std::abs(withc - base);
            what = "pauli C-set, theta=" + fmt(theta);
        }
    }
    return {worst <= 2e-3, "max |p_max - pure-state p_max| = " + fmt(worst) + " (" + what + ")"};
}

Outcome criterion_qubit_tightness(const std::vector<double>& base) {
    const std::vector<double> thetas{M_PI / 6, M_PI / 4, M_PI / 3};
    if (base.size() != thetas.size())
        return {false, "pure-state reference thresholds unavailable"};
    double worst = 0.0;
    for (size_t i = 0; i < thetas.size(); ++i) {
        const double attack = qubit_eb_threshold(thetas[i], 0.0).p;
        worst = std::max(worst, std::abs(attack - base[i]));
    }
    return {worst <= 2e-3, "max |EB threshold - p_max| = " + fmt(worst)};
}

// --- criterion 7: displaced domain grows with mixedness ---------------------

Outcome criterion_displaced_mixed() {
    FockSpace space{16};
    const double alpha = 0.5;
    const std::vector<double> aout = linspace(0.02, 0.52, 20);
    const std::vector<double> v = linspace(0.5, 1.1, 20);
    const DisplacedDomainMap pure = domain_map_displaced(alpha, 0.0, aout, v, 0, space);
    const DisplacedDomainMap mixed = domain_map_displaced(alpha, 0.2, aout, v, 0, space);
    int gained = 0, lost = 0, pure_n = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const bool q0 = pure.label(i, j) == 1, q2 = mixed.label(i, j) == 1;
            pure_n += q0;
            if (q2 && !q0) ++gained;
            if (q0 && !q2) ++lost;
        }
    return {lost == 0 && gained >= 1,
            "pure-source region " + std::to_string(pure_n) + " pts, gained " +
                std::to_string(gained) + ", lost " + std::to_string(lost)};
}

// --- criterion 8: extra C unitaries close the gap ---------------------------

Outcome criterion_c_monotonicity() {
    FockSpace space{14};
    const double r = 0.5, nbar = 0.3;
    GaussianParams gp;
    gp.r = r;
    gp.nbar = nbar;
    const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
    // the operator-set improvement lives in the rising part of the boundary;
    // past the junction every curve sits at the fidelity floor and there is
    // no gap left to close
    const std::vector<double> grid = linspace(0.6, 1.0, 5);
    const ClassicalBoundary cb =
        lagrange_boundary(sc.ensemble.states[0], sc.ensemble.states[1], grid);

    std::vector<std::vector<double>> curves;
    for (int m : {0, 1, 3, 5})
        curves.push_back(boundary_scan_squeezed(r, nbar, grid, m, space).var_p);

    bool monotone = true;
    const double slack = 3e-4;  // bisection resolution
    for (size_t i = 0; i < grid.size(); ++i) {
        for (size_t k = 1; k < curves.size(); ++k)
            if (curves[k][i] < curves[k - 1][i] - slack) monotone = false;
        if (curves.back()[i] > cb.var_p[i] + slack) monotone = false;
    }
    double gap0 = 0.0, gap5 = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        gap0 += cb.var_p[i] - curves[0][i];
        gap5 += cb.var_p[i] - curves[3][i];
    }
    gap0 /= grid.size();
    gap5 /= grid.size();
    const bool improved = gap5 < 0.8 * gap0;
    return {monotone && improved, "mean gap m=0: " + fmt(gap0) + ", m=5: " + fmt(gap5) +
                                      (monotone ? "" : " (monotonicity violated)")};
}

// --- criterion 9: closed forms of the discrimination line -------------------

Outcome criterion_closed_forms() {
    FockSpace space{40};
    const UsdLine line = usd_type_line(0.4, 0.2, linspace(0.0, 2.0, 9), space);
    double rel = 0.0;
    for (size_t i = 0; i < line.alpha.size(); ++i)
        rel = std::max(rel, std::abs(line.m_fock[i] / line.m_closed[i] - 1.0));
    // least squares slope of log m_fock against alpha^2 (skip alpha = 0)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 1; i < line.alpha.size(); ++i) {
        const double xx = line.alpha[i] * line.alpha[i], yy = std::log(line.m_fock[i]);
        sx += xx;
        sy += yy;
        sxx += xx * xx;
        sxy += xx * yy;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double slope_rel = std::abs(slope / (-2.0 * line.btilde1) - 1.0);
    return {rel <= 1e-6 && slope_rel <= 1e-4,
            "Q-ratio rel err " + fmt(rel) + ", slope rel err " + fmt(slope_rel)};
}

// --- criterion 10: performance envelope --------------------------------------

Outcome criterion_performance() {
    FockSpace space{14};
    GaussianParams gp;
    gp.r = 0.5;
    gp.nbar = 0.3;
    const CvScenario sc = cv_ensemble(CvKind::squeezed, gp, space);
    MeasuredMoments mm;
    mm.var_x0 = 1.4;
    mm.var_p0 = 0.45;
    const EvmTemplate t = template_with_C_unitaries(
        template_squeezed_with_identity(mm, std::abs(sc.source.overlap)), sc.source,
        generalized_spin_operators(sc.source.dim_c, 5));
    const double t0 = now_s();
    const VerificationResult res = feasibility(t);
    const double single = now_s() - t0;
    (void)res;

    FockSpace big{16};
    const double t1 = now_s();
    boundary_scan_squeezed(0.5, 0.0, linspace(0.75, 2.0, 40), 0, big);
    const double scan = now_s() - t1;
    return {single <= 5.0 && scan <= 600.0,
            "m=5 feasibility (" + std::to_string(t.dim) + "x" + std::to_string(t.dim) +
                ") " + fmt(single) + " s, 40-point scan " + fmt(scan) + " s"};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    std::vector<double> qubit_base;
    const std::vector<Entry> entries{
        {1, "moment-matrix positivity", criterion_positivity},
        {2, "separable soundness", criterion_soundness},
        {3, "fidelity floor", criterion_floor},
        {4, "pure-state tightness", criterion_pure_tightness},
        {5, "qubit purification equivalence",
         [&] { return criterion_qubit_purifications(qubit_base); }},
        {6, "qubit tightness", [&] { return criterion_qubit_tightness(qubit_base); }},
        {7, "displaced mixed-beats-pure", criterion_displaced_mixed},
        {8, "C-unitary monotonicity", criterion_c_monotonicity},
        {9, "discrimination-line closed forms", criterion_closed_forms},
        {10, "performance envelope", criterion_performance},
    };
    int failures = 0;
    for (const auto& e : entries) {
        const double t0 = now_s();
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double dt = now_s() - t0;
        if (!out.pass) ++failures;
        std::printf("[%s] %2d %-36s %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", e.id,
                    e.name, out.detail.c_str(), dt);
        std::fflush(stdout);
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures ? 1 : 0;
}
