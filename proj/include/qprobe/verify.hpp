#pragma once

#include "qprobe/evm.hpp"
#include "qprobe/fock.hpp"
#include "qprobe/sources.hpp"

#include <string>
#include <vector>

namespace qprobe {

enum class Verdict { quantum, classical_compatible, boundary };

std::string to_string(Verdict v);

struct SolverOptions {
    double tol = 1e-7;       // target accuracy of t*
    double deadband = 1e-6;  // |t*| below this is reported as boundary
    int max_iter_per_stage = 400;
    double mu_init = 1e-1;   // smoothing continuation start
    double mu_final = 1e-8;  // smoothing continuation end
    int restarts = 1;        // extra random restarts (the program is concave,
                             // one run suffices; kept for robustness checks)
    unsigned long long seed = 0;
    bool emit_witness = false;
};

struct VerificationResult {
    // Certified bracket on the optimum of  max_theta min(lmin(M), lmin(PT(M))).
    double t_star = 0.0;       // achieved value = lower bound on the optimum
    double upper_bound = 0.0;  // smoothing-based upper bound on the optimum
    // quantum iff t_star < -deadband, classical_compatible iff t_star >
    // +deadband, boundary inside the deadband; the bracket is for auditing
    Verdict verdict = Verdict::boundary;
    Eigen::VectorXd theta_opt;
    int iterations = 0;
    double runtime_s = 0.0;
    // Infeasibility witness (unit-trace PSD pair orthogonal to all free
    // directions, pairing = upper bound); filled when emit_witness is set.
    Matrix witness_1, witness_2;
    double witness_value = 0.0;
    double witness_residual = 0.0;
};

// Solves the concave max-min-eigenvalue program for a template. An optional
// warm start (previous theta_opt) skips most of the smoothing continuation.
VerificationResult feasibility(const EvmTemplate& t, const SolverOptions& opts = {},
                               const Eigen::VectorXd* warm = nullptr);

struct BoundaryCurve {
    std::vector<double> var_x;
    std::vector<double> var_p;       // smallest classical-compatible Var(p)
    std::vector<bool> flagged;       // bracket failure at this point
    std::vector<double> margin;      // t* at the classical endpoint
};

// Boundary of the quantum domain for two squeezed thermal test states
// (+r and -r squeezings, mean photon number nbar). m = number of extra
// unitaries on the purifying system included in the matrix of moments.
BoundaryCurve boundary_scan_squeezed(double r, double nbar,
                                     const std::vector<double>& var_x_grid, int m,
                                     const FockSpace& space, const SolverOptions& opts = {});

enum class QubitMode { naive, optimal, optimal_with_c };

struct QubitCurve {
    std::vector<double> theta;
    std::vector<double> p_max;  // largest depolarizing p still verified quantum
    std::vector<bool> flagged;
};

QubitCurve boundary_scan_qubit(const std::vector<double>& theta_grid, double phi,
                               QubitMode mode, const SolverOptions& opts = {});

struct DisplacedDomainMap {
    std::vector<double> a_out;  // measured output displacement amplitudes
    std::vector<double> v;      // measured symmetric variances
    // label(i, j): 1 = quantum, 0 = classical-compatible, -1 = boundary
    Eigen::MatrixXi label;
};

DisplacedDomainMap domain_map_displaced(double alpha, double nbar,
                                        const std::vector<double>& aout_grid,
                                        const std::vector<double>& v_grid, int m,
                                        const FockSpace& space,
                                        const SolverOptions& opts = {});

// Depolarizing channel on a qubit: p * I/2 + (1-p) * rho.
DensityMatrix depolarize(const DensityMatrix& rho, double p);

}  // namespace qprobe
