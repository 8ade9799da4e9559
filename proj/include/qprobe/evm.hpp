#pragma once

#include <string>
#include <vector>

#include "qprobe/numerics.hpp"
#include "qprobe/sources.hpp"

namespace qprobe {

enum class Provenance : int { free_entry = 0, measured = 1, source = 2, commutator = 3 };

/// One additive contribution of a free parameter: theta * weight at (row, col)
/// plus the Hermitian mirror theta * conj(weight) at (col, row).
struct FreeTerm {
    int row = 0;
    int col = 0;
    Complex weight = 1.0;
};

struct FreeParam {
    std::string name;
    std::vector<FreeTerm> terms;
};

/// Affine family of Hermitian matrices M(theta) = M0 + sum_a theta_a M_a with a
/// partial-transposition entry permutation (A-index swap).
class EvmTemplate {
  public:
    int dim = 0;
    int n_a = 2, n_b = 1, n_c = 1;
    bool b_has_identity = false;
    Matrix fixed;                     // M0, full Hermitian matrix
    std::vector<FreeParam> params;
    std::vector<int> pt_of_entry;     // linear entry r*dim+c -> permuted entry
    Eigen::MatrixXi provenance;       // per-entry Provenance

    int num_params() const { return static_cast<int>(params.size()); }
    Matrix evaluate(const Eigen::VectorXd& theta) const;
    Matrix partial_transpose(const Matrix& m) const;
    Matrix basis_matrix(int a) const;
    std::string to_json() const;
};

/// Second-moment homodyne statistics for the squeezed scenario (state 0);
/// state 1 follows from the phase-symmetry relations.
struct MeasuredMoments {
    double var_x0 = 0.5;
    double var_p0 = 0.5;
    double mean_x0 = 0.0;
    double mean_p0 = 0.0;
    bool symmetry = true;

    void validate(const Tolerances& tols = default_tols()) const;
};

/// Per-state homodyne statistics for the displaced scenario.
struct DisplacedMoments {
    double mean_x0 = 0, mean_p0 = 0, var_x0 = 0.5, var_p0 = 0.5;
    double mean_x1 = 0, mean_p1 = 0, var_x1 = 0.5, var_p1 = 0.5;

    /// Paper-style parameterization: means ±(sqrt2 a_out, 0), common variance v.
    static DisplacedMoments symmetric(double a_out, double v);
};

/// Exact EVM of a (possibly multipartite) state for given operator sets.
/// C defaults to {1}. Entry ((i,j,k),(l,m,n)) = tr(rho A_i†A_l ⊗ B_j†B_m ⊗ C_k†C_n).
Operator evm_exact(const DensityMatrix& rho, const std::vector<Matrix>& a_ops,
                   const std::vector<Matrix>& b_ops,
                   const std::vector<Matrix>& c_ops = {});

/// Same for a pure |psi> on A⊗B⊗C without materializing the density matrix.
Operator evm_exact_pure(const Vector& psi, int dim_a, int dim_b, int dim_c,
                        const std::vector<Matrix>& a_ops, const std::vector<Matrix>& b_ops,
                        const std::vector<Matrix>& c_ops = {});

/// A-index block transposition: ((i,j),(l,m)) -> ((l,j),(i,m)).
Matrix block_partial_transpose(const Matrix& chi, int n_a);

/// 4x4 template of the squeezed scenario, row order (0x, 0p, 1x, 1p);
/// entries in conditional normalization (diagonal = measured variances).
EvmTemplate template_squeezed(const MeasuredMoments& moments, double s,
                              const Tolerances& tols = default_tols());

/// 6x6 squeezed-scenario template over B = {1, x, p} (first moments fixed to 0),
/// the base used when C-unitaries are appended.
EvmTemplate template_squeezed_with_identity(const MeasuredMoments& moments, double s,
                                            const Tolerances& tols = default_tols());

/// 6x6 displaced-scenario template over B = {1, x, p}.
EvmTemplate template_displaced(const DisplacedMoments& moments, double s,
                               const Tolerances& tols = default_tols());

/// Enlarge a base template (B including identity) with C-unitary columns:
/// C' = {1} ∪ c_ops. Entries with trivial B-part are fixed from rho_AC of the
/// source; entries with nontrivial B- and C-part are free, shared across equal
/// operator products.
EvmTemplate template_with_C_unitaries(const EvmTemplate& base, const PurifiedSource& source,
                                      const std::vector<Operator>& c_ops);

/// Direct tripartite (or bipartite) feasibility family for the qubit scenario:
/// rho >= 0 with fixed output marginals and fixed rho_A (or full rho_AC when
/// include_c), PT on the A index.
EvmTemplate template_qubit(const DensityMatrix& out0, const DensityMatrix& out1,
                           const PurifiedSource& source, bool include_c,
                           const Tolerances& tols = default_tols());

/// Affine family of dim x dim Hermitian matrices satisfying tr(rho K) = v for
/// each (K, v); free directions span the constraint nullspace.
EvmTemplate hermitian_affine_family(int dim, int n_a,
                                    const std::vector<std::pair<Matrix, double>>& constraints);

}  // namespace qprobe
