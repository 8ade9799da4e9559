#include "qprobe/attack.hpp"

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace qprobe {

namespace {

uint64_t splitmix(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
    return double(splitmix(state) >> 11) / 9007199254740992.0;
}

// Fidelity of unnormalized PSD matrices: tr sqrt(sqrt(a) b sqrt(a)).
// Homogeneous of degree one in a joint scaling of (a, b).
double fid_psd(const Matrix& a, const Matrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> ea(a);
    Eigen::VectorXd va = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Matrix sq = ea.eigenvectors() * va.asDiagonal() * ea.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> em(sq * b * sq);
    return em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

// Golden-section maximization of a unimodal (here: concave) scalar function.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// Nelder-Mead minimization; returns best value, x updated in place.
double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                   Eigen::VectorXd& x, double scale, int max_evals) {
    const int n = int(x.size());
    std::vector<Eigen::VectorXd> pts(n + 1, x);
    std::vector<double> vals(n + 1);
    for (int i = 1; i <= n; ++i) pts[i][i - 1] += scale;
    for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);
    int evals = n + 1;
    std::vector<int> order(n + 1);
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return vals[a] < vals[b]; });
        if (vals[order[n]] - vals[order[0]] < 1e-13) break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[order[i]];
        centroid /= n;
        const int worst = order[n];
        Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
        double fr = f(xr);
        ++evals;
        if (fr < vals[order[0]]) {
            Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[order[n - 1]]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            Eigen::VectorXd xc = centroid + 0.5 * (pts[worst] - centroid);
            double fc = f(xc);
            ++evals;
            if (fc < vals[worst]) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[order[i]] = pts[order[0]] + 0.5 * (pts[order[i]] - pts[order[0]]);
                    vals[order[i]] = f(pts[order[i]]);
                }
                evals += n;
            }
        }
    }
    int best = int(std::min_element(vals.begin(), vals.end()) - vals.begin());
    x = pts[best];
    return vals[best];
}

}  // namespace

void EbStrategy::validate() const {
    if (povm.empty()) throw Error("EbStrategy: empty POVM");
    const int d = povm[0].dim();
    Matrix sum = Matrix::Zero(d, d);
    for (const Operator& pi : povm) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(pi.mat(), Eigen::EigenvaluesOnly);
        if (es.eigenvalues()[0] < -1e-10) throw Error("EbStrategy: POVM element not PSD");
        sum += pi.mat();
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
        throw Error("EbStrategy: POVM does not sum to the identity");
}

std::string EbStrategy::to_json() const {
    nlohmann::json j;
    j["povm"] = nlohmann::json::array();
    for (const Operator& pi : povm) {
        std::vector<double> flat;
        for (int r = 0; r < pi.dim(); ++r)
            for (int c = 0; c < pi.dim(); ++c) {
                flat.push_back(pi.mat()(r, c).real());
                flat.push_back(pi.mat()(r, c).imag());
            }
        j["povm"].push_back({{"dim", pi.dim()}, {"dense_row_major", flat}});
    }
    j["squeezings"] = squeezings;
    j["qubit_repreps"] = nlohmann::json::array();
    for (const Vector& v : qubit_repreps) {
        std::vector<double> flat;
        for (int r = 0; r < v.size(); ++r) {
            flat.push_back(v[r].real());
            flat.push_back(v[r].imag());
        }
        j["qubit_repreps"].push_back(flat);
    }
    return j.dump();
}

EbStrategy helstrom_povm(const DensityMatrix& rho0, const DensityMatrix& rho1, double p0,
                         double p1) {
    if (rho0.dim() != rho1.dim()) throw Error("helstrom_povm: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(p0 * rho0.mat() - p1 * rho1.mat());
    const int d = rho0.dim();
    Matrix pi0 = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k)
        if (es.eigenvalues()[k] >= 0)
            pi0 += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
    EbStrategy s;
    s.povm.push_back(Operator::psd_op(pi0));
    s.povm.push_back(Operator::psd_op(Matrix::Identity(d, d) - pi0));
    return s;
}

double helstrom_error(const DensityMatrix& rho0, const DensityMatrix& rho1, double p0,
                      double p1) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(p0 * rho0.mat() - p1 * rho1.mat(),
                                             Eigen::EigenvaluesOnly);
    return 0.5 * (1.0 - es.eigenvalues().cwiseAbs().sum()) +
           0.5 * (p0 + p1 - 1.0);  // last term vanishes for normalized priors
}

double fidelity_floor(const DensityMatrix& rho0, const DensityMatrix& rho1,
                      const Tolerances& tols) {
    return 0.5 * fidelity(rho0, rho1, tols);
}

ClassicalBoundary lagrange_boundary(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                    const std::vector<double>& c_grid,
                                    const Tolerances& tols) {
    ClassicalBoundary out;
    out.region_b_level = fidelity_floor(rho0, rho1, tols);
    out.region_b_onset = std::numeric_limits<double>::infinity();
    for (double c : c_grid) {
        auto g = [&](double lam) {
            return 0.5 * fid_psd(rho0.mat() + lam * rho1.mat(),
                                 rho1.mat() + lam * rho0.mat()) -
                   lam * c;
        };
        // expand until the concave dual stops increasing at the right edge
        double hi = 1.0;
        while (g(hi) > g(hi * 0.999) && hi < 1e6) hi *= 2.0;
        const double lam0 = golden_max(g, 0.0, hi, 1e-8);
        const double g_lam = g(lam0), g_zero = g(0.0);
        // lambda = 0 optimal (within the search resolution) marks the flat region
        const bool in_b = g_zero >= g_lam - 1e-10 * std::max(1.0, std::abs(g_zero));
        const double lam = in_b ? 0.0 : lam0;
        out.var_x.push_back(c);
        out.var_p.push_back(in_b ? out.region_b_level : g_lam);
        out.lambda.push_back(lam);
        out.region_b.push_back(in_b);
        if (in_b) out.region_b_onset = std::min(out.region_b_onset, c);
    }
    return out;
}

std::vector<PovmCurvePoint> optimize_povm_pure_squeezed(double r_in,
                                                        const std::vector<double>& targets,
                                                        int n_elements, uint64_t seed,
                                                        const FockSpace& space) {
    if (n_elements < 2) throw Error("optimize_povm_pure_squeezed: need >= 2 elements");
    // test states in the 2-dim span: overlap s = (cosh 2r)^{-1/2}
    const Vector psi0 = squeeze(space, r_in).mat() * vacuum_state(space);
    const Vector psi1 = squeeze(space, -r_in).mat() * vacuum_state(space);
    const double s = std::abs(psi0.dot(psi1));
    Vector a0(2), a1(2);
    a0 << 1.0, 0.0;
    a1 << s, std::sqrt(std::max(0.0, 1.0 - s * s));

    const int nfree = n_elements - 1;       // last element is the completion
    const int nparams = 8 * nfree + n_elements;  // G entries + squeezings

    auto build = [&](const Eigen::VectorXd& x, std::vector<Matrix>* povm_out,
                     std::vector<double>* r_out, double* penalty) {
        std::vector<Matrix> povm;
        Matrix sum = Matrix::Zero(2, 2);
        for (int i = 0; i < nfree; ++i) {
            Matrix g(2, 2);
            const int o = 8 * i;
            g << Complex(x[o], x[o + 1]), Complex(x[o + 2], x[o + 3]),
                Complex(x[o + 4], x[o + 5]), Complex(x[o + 6], x[o + 7]);
            Matrix pi = g.adjoint() * g;
            sum += pi;
            povm.push_back(std::move(pi));
        }
        Matrix last = Matrix::Identity(2, 2) - sum;
        Eigen::SelfAdjointEigenSolver<Matrix> es(last, Eigen::EigenvaluesOnly);
        *penalty = 1e4 * std::pow(std::max(0.0, -es.eigenvalues()[0]), 2);
        povm.push_back(std::move(last));
        r_out->assign(x.data() + 8 * nfree, x.data() + 8 * nfree + n_elements);
        *povm_out = std::move(povm);
    };

    auto moments = [&](const std::vector<Matrix>& povm, const std::vector<double>& rs) {
        double vp = 0.0, vx = 0.0;
        for (int i = 0; i < n_elements; ++i) {
            const double q0 = std::max(0.0, (a0.adjoint() * povm[i] * a0)(0).real());
            const double q1 = std::max(0.0, (a1.adjoint() * povm[i] * a1)(0).real());
            vp += 0.25 * (q0 * std::exp(-2.0 * rs[i]) + q1 * std::exp(2.0 * rs[i]));
            vx += 0.25 * (q0 * std::exp(2.0 * rs[i]) + q1 * std::exp(-2.0 * rs[i]));
        }
        return std::make_pair(vx, vp);
    };

    std::vector<PovmCurvePoint> points;
    for (double target : targets) {
        const bool constrained = !std::isnan(target);
        auto objective = [&](const Eigen::VectorXd& x) {
            std::vector<Matrix> povm;
            std::vector<double> rs;
            double penalty;
            build(x, &povm, &rs, &penalty);
            auto [vx, vp] = moments(povm, rs);
            double f = vp + penalty;
            if (constrained) f += 100.0 * (vx - target) * (vx - target);
            return f;
        };
        double best = std::numeric_limits<double>::infinity();
        double worst_of_best = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_x;
        uint64_t rng = seed;
        const int n_starts = 20;
        std::vector<double> finals;
        for (int start = 0; start < n_starts; ++start) {
            Eigen::VectorXd x(nparams);
            for (int i = 0; i < nparams; ++i) x[i] = (uniform01(rng) - 0.5);
            // bias the first seed toward the Helstrom-like split
            if (start == 0) {
                x.setZero();
                x[0] = 1.0;   // G0 ~ |0><0|
                x[14] = 1.0;  // G1 ~ |1><1| (second G diag entry)
            }
            double v = nelder_mead(objective, x, 0.3, 20000);
            v = nelder_mead(objective, x, 0.05, 10000);  // polish
            finals.push_back(v);
            if (v < best) {
                best = v;
                best_x = x;
            }
        }
        std::sort(finals.begin(), finals.end());
        worst_of_best = finals[std::min<size_t>(4, finals.size() - 1)];

        PovmCurvePoint pt;
        std::vector<Matrix> povm;
        std::vector<double> rs;
        double penalty;
        build(best_x, &povm, &rs, &penalty);
        // repair the completion element and renormalize exactly
        Eigen::SelfAdjointEigenSolver<Matrix> es(povm.back());
        povm.back() = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                      es.eigenvectors().adjoint();
        Matrix total = Matrix::Zero(2, 2);
        for (const Matrix& p : povm) total += p;
        Eigen::SelfAdjointEigenSolver<Matrix> et(total);
        Matrix inv_sqrt = et.eigenvectors() *
                          et.eigenvalues().cwiseMax(1e-14).cwiseSqrt().cwiseInverse()
                              .asDiagonal() *
                          et.eigenvectors().adjoint();
        for (Matrix& p : povm) p = inv_sqrt * p * inv_sqrt;
        auto [vx, vp] = moments(povm, rs);
        pt.var_x = vx;
        pt.var_p = vp;
        pt.multistart_spread = worst_of_best - best;
        for (const Matrix& p : povm) pt.strategy.povm.push_back(Operator::psd_op(p));
        pt.strategy.squeezings = rs;
        points.push_back(std::move(pt));
    }
    return points;
}

UsdLine usd_type_line(double r, double nbar, const std::vector<double>& alpha_grid,
                      const FockSpace& space, const Tolerances& tols) {
    UsdLine line;
    const double denom = nbar * nbar + (nbar + 0.5) * (1.0 + std::cosh(2.0 * r));
    line.btilde1 = (nbar + 0.5) * std::sinh(2.0 * r) / denom;
    const DensityMatrix rho0 = squeezed_thermal(space, r, nbar, tols);
    const DensityMatrix rho1 = squeezed_thermal(space, -r, nbar, tols);
    for (double a : alpha_grid) {
        const Vector coh = coherent_state(space, a, tols);
        const Matrix p0 = coh * coh.adjoint();
        const Matrix p1 =
            phase_rotation(space, M_PI / 2).mat().adjoint() * p0 *
            phase_rotation(space, M_PI / 2).mat();
        Eigen::SelfAdjointEigenSolver<Matrix> es(p0 + p1, Eigen::EigenvaluesOnly);
        const double kappa = 1.0 / es.eigenvalues().maxCoeff();
        const double q0 = (coh.adjoint() * rho0.mat() * coh)(0).real();
        const double q1 = (coh.adjoint() * rho1.mat() * coh)(0).real();
        if (q0 <= 0) throw Error("usd_type_line: vanishing Q-function denominator");
        line.alpha.push_back(a);
        line.kappa.push_back(kappa);
        line.m_fock.push_back(q1 / q0);
        line.m_closed.push_back(std::exp(-line.btilde1 * 2.0 * a * a));
    }
    return line;
}

QubitEbResult qubit_eb_threshold(double theta, double phi, const Tolerances& tols) {
    const QubitScenario sc = qubit_ensemble(theta, phi, tols);
    const DensityMatrix& rho0 = sc.ensemble.states[0];
    const DensityMatrix& rho1 = sc.ensemble.states[1];
    auto bloch = [](const Matrix& m) {
        return Eigen::Vector3d(2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(),
                               (m(0, 0) - m(1, 1)).real());
    };
    const Eigen::Vector3d b0 = bloch(rho0.mat()), b1 = bloch(rho1.mat());
    if ((b0.head<2>() + b1.head<2>()).norm() > 1e-9 || std::abs(b0[2] - b1[2]) > 1e-9)
        throw Error("qubit_eb_threshold: ensemble lacks the mirror symmetry");
    const double rho_uv = b0.head<2>().norm();
    const double w = b0[2];
    const double dtr = trace_distance(rho0, rho1);
    if (dtr < 1e-12)
        throw Error("qubit_eb_threshold: identical test states");
    const double inv = 1.0 / std::sqrt(std::pow(rho_uv / dtr, 2) + w * w);
    QubitEbResult res;
    res.p = 1.0 - inv;

    // re-prepared pure states of the test-state form matching the output
    const double sin_t = inv * rho_uv / dtr;
    const double cos_t = inv * w;
    const double psi = std::atan2(b0[1], b0[0]);
    const double t = std::atan2(sin_t, cos_t);
    Vector r0(2), r1(2);
    r0 << std::cos(t / 2.0), std::sin(t / 2.0) * std::exp(Complex(0, psi));
    r1 << std::cos(t / 2.0), -std::sin(t / 2.0) * std::exp(Complex(0, psi));
    res.strategy = helstrom_povm(rho0, rho1);
    res.strategy.qubit_repreps = {r0, r1};

    // consistency: the simulated output must equal the depolarized input
    const std::vector<DensityMatrix> out = simulate_eb_qubit(res.strategy, sc.ensemble);
    const Matrix want =
        res.p * 0.5 * Matrix::Identity(2, 2) + (1.0 - res.p) * rho0.mat();
    if ((out[0].mat() - want).cwiseAbs().maxCoeff() > 1e-9)
        throw Error("qubit_eb_threshold: output not representable as depolarizing noise");
    return res;
}

MeasuredMoments simulate_eb_cv(const EbStrategy& strategy, const DensityMatrix& rho0,
                               const DensityMatrix& rho1) {
    if (strategy.povm.size() != strategy.squeezings.size())
        throw Error("simulate_eb_cv: POVM / re-preparation size mismatch");
    MeasuredMoments mm;
    mm.var_x0 = 0.0;
    mm.var_p0 = 0.0;
    for (size_t i = 0; i < strategy.povm.size(); ++i) {
        const double q0 = std::max(0.0, (rho0.mat() * strategy.povm[i].mat()).trace().real());
        const double q1 = std::max(0.0, (rho1.mat() * strategy.povm[i].mat()).trace().real());
        const double e2r = std::exp(2.0 * strategy.squeezings[i]);
        mm.var_p0 += 0.25 * (q0 / e2r + q1 * e2r);
        mm.var_x0 += 0.25 * (q0 * e2r + q1 / e2r);
    }
    return mm;
}

std::vector<DensityMatrix> simulate_eb_qubit(const EbStrategy& strategy,
                                             const Ensemble& ensemble) {
    if (strategy.povm.size() != strategy.qubit_repreps.size())
        throw Error("simulate_eb_qubit: POVM / re-preparation size mismatch");
    std::vector<DensityMatrix> out;
    for (const DensityMatrix& rho : ensemble.states) {
        Matrix m = Matrix::Zero(2, 2);
        for (size_t i = 0; i < strategy.povm.size(); ++i) {
            const double q = (rho.mat() * strategy.povm[i].mat()).trace().real();
            const Vector& v = strategy.qubit_repreps[i];
            m += q * (v * v.adjoint()) / v.squaredNorm();
        }
        out.emplace_back(std::move(m));
    }
    return out;
}

}  // namespace qprobe
