#pragma once

#include <vector>

#include "qprobe/fock.hpp"
#include "qprobe/numerics.hpp"

namespace qprobe {

/// Two-state test ensemble on system B.
struct Ensemble {
    std::vector<DensityMatrix> states;
    std::vector<double> probs;  // sums to 1
};

/// Entanglement-based source description: purifications of the test states on
/// B⊗C, their overlap, the tripartite source state and the reduced state on A⊗C.
struct PurifiedSource {
    int dim_b = 0;
    int dim_c = 0;
    std::vector<Vector> purifications;  // each of length dim_b * dim_c
    Complex overlap = 0.0;              // <psi1|psi0>
    Vector source_state;                // on A⊗B⊗C, A first
    Matrix rho_ac;                      // 2*dim_c x 2*dim_c
};

enum class PurificationMode { naive, optimal };

/// |psi> = sum_k sqrt(lambda_k) |b_k>|k> from the eigensystem of rho; dim_C = dim_B.
Vector canonical_purification(const DensityMatrix& rho,
                              const Tolerances& tols = default_tols());

/// Purification pair with |<psi0|psi1>| = F(rho0, rho1), overlap real >= 0.
struct PurificationPair {
    Vector psi0, psi1;
    double overlap;
};
PurificationPair optimal_purification_pair(const DensityMatrix& rho0,
                                           const DensityMatrix& rho1,
                                           const Tolerances& tols = default_tols());

/// |psi_src> = sum_i sqrt(p_i)|i>_A |psi_i>_BC together with rho_AC.
PurifiedSource effective_source(const std::vector<Vector>& purifications,
                                const std::vector<double>& probs, int dim_b, int dim_c);

/// Qubit test states cos(θ/2)|0> ± sin(θ/2)|1>, mixed through a conditional
/// phase gate diag(1,1,1,e^{iφ}) against C = (|0>+|1>)/√2.
struct QubitScenario {
    Ensemble ensemble;
    PurifiedSource source;  // physical (conditional-phase) purifications
};
QubitScenario qubit_ensemble(double theta, double phi,
                             const Tolerances& tols = default_tols());

enum class CvKind { squeezed, displaced };

struct CvScenario {
    Ensemble ensemble;
    PurifiedSource source;  // optimal purifications
};
CvScenario cv_ensemble(CvKind kind, const GaussianParams& params, const FockSpace& space,
                       const Tolerances& tols = default_tols());

/// Rebuild the source from given purifications (probability 1/2 each).
PurifiedSource source_from_purifications(const Vector& psi0, const Vector& psi1,
                                         int dim_b, int dim_c);

}  // namespace qprobe
