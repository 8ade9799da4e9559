#pragma once

#include "qprobe/evm.hpp"
#include "qprobe/fock.hpp"
#include "qprobe/sources.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qprobe {

/// Measure-and-re-prepare channel: POVM plus per-outcome re-prepared state,
/// given either as a squeezed-vacuum parameter (CV) or an explicit pure state.
struct EbStrategy {
    std::vector<Operator> povm;
    std::vector<double> squeezings;      // CV re-preparations |r_i>
    std::vector<Vector> qubit_repreps;   // qubit re-preparations

    /// Throws unless the POVM elements are PSD and sum to 1 within 1e-9.
    void validate() const;
    std::string to_json() const;
};

/// Minimum-error discrimination POVM: projectors onto the non-negative and
/// negative eigenspaces of p0 rho0 - p1 rho1. Re-preparations left empty.
EbStrategy helstrom_povm(const DensityMatrix& rho0, const DensityMatrix& rho1,
                         double p0 = 0.5, double p1 = 0.5);

double helstrom_error(const DensityMatrix& rho0, const DensityMatrix& rho1,
                      double p0 = 0.5, double p1 = 0.5);

/// Global minimum of Var(p) over measure-and-re-prepare channels: F(rho0,rho1)/2.
double fidelity_floor(const DensityMatrix& rho0, const DensityMatrix& rho1,
                      const Tolerances& tols = default_tols());

/// Classical-domain boundary in the (Var_x, Var_p) plane.
struct ClassicalBoundary {
    std::vector<double> var_x;    // region-A abscissae (the scanned c grid)
    std::vector<double> var_p;    // min Var(p) at Var_x = c
    std::vector<double> lambda;   // optimal multiplier; ~0 marks region B
    std::vector<bool> region_b;   // point reached the lambda >= 0 boundary
    double region_b_level = 0.0;  // flat boundary level (fidelity floor)
    double region_b_onset = 0.0;  // smallest c already in region B
};

/// Dual construction: for each c, max over lambda >= 0 of
/// F(rho0 + lambda rho1, rho1 + lambda rho0)/2 - lambda c.
ClassicalBoundary lagrange_boundary(const DensityMatrix& rho0, const DensityMatrix& rho1,
                                    const std::vector<double>& c_grid,
                                    const Tolerances& tols = default_tols());

struct PovmCurvePoint {
    double var_x = 0.0;
    double var_p = 0.0;
    double multistart_spread = 0.0;  // best-value spread across seeds
    EbStrategy strategy;             // 2x2 elements in the test-state span basis
};

/// Direct numeric optimization for two pure squeezed test states (+/- r_in):
/// four POVM elements on the 2-dim span, squeezed-vacuum re-preparations.
/// A NaN target means the unconstrained Var(p) minimum.
std::vector<PovmCurvePoint> optimize_povm_pure_squeezed(
    double r_in, const std::vector<double>& var_x_targets, int n_elements = 4,
    uint64_t seed = 20100521, const FockSpace& space = FockSpace{});

/// Almost-unambiguous-discrimination strategy for region B: slope of the
/// boundary line through the junction point as a function of the coherent
/// POVM amplitude alpha, closed form vs truncated-Fock evaluation.
struct UsdLine {
    std::vector<double> alpha;
    std::vector<double> m_closed;  // exp(-Btilde1 (alpha*^2 + alpha^2))
    std::vector<double> m_fock;    // <alpha|rho1|alpha> / <alpha|rho0|alpha>
    std::vector<double> kappa;     // admissible scale of Pi_0 = kappa |alpha><alpha|
    double btilde1 = 0.0;
};
UsdLine usd_type_line(double r, double nbar, const std::vector<double>& alpha_grid,
                      const FockSpace& space, const Tolerances& tols = default_tols());

struct QubitEbResult {
    double p = 0.0;  // equivalent depolarizing parameter
    EbStrategy strategy;
};

/// Helstrom measurement + re-preparing states of the test-state form; the
/// induced noise equals a depolarizing channel whose p is returned.
QubitEbResult qubit_eb_threshold(double theta, double phi,
                                 const Tolerances& tols = default_tols());

/// Symmetrized output moments of a CV strategy (equal mixture with the
/// quarter-rotated strategy): Var_p = 1/4 sum_i (q0i e^{-2ri} + q1i e^{2ri}).
MeasuredMoments simulate_eb_cv(const EbStrategy& strategy, const DensityMatrix& rho0,
                               const DensityMatrix& rho1);

/// Qubit outputs rho_k^out = sum_i tr(rho_k pi_i) |psi_i><psi_i|.
std::vector<DensityMatrix> simulate_eb_qubit(const EbStrategy& strategy,
                                             const Ensemble& ensemble);

}  // namespace qprobe
