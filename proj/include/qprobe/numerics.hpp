#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "qprobe/tolerances.hpp"

namespace qprobe {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense complex square matrix with declared (and checked) structural flags.
class Operator {
  public:
    explicit Operator(Matrix m, bool hermitian = false, bool unitary = false,
                      bool psd = false, const Tolerances& tols = default_tols());

    static Operator identity(int dim);
    static Operator hermitian(Matrix m, const Tolerances& tols = default_tols());
    static Operator unitary_op(Matrix m, const Tolerances& tols = default_tols());
    static Operator psd_op(Matrix m, const Tolerances& tols = default_tols());

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& mat() const { return mat_; }
    bool is_hermitian() const { return hermitian_; }
    bool is_unitary() const { return unitary_; }
    bool is_psd() const { return psd_; }

  private:
    Matrix mat_;
    bool hermitian_ = false;
    bool unitary_ = false;
    bool psd_ = false;
};

/// Hermitian, positive semidefinite, (approximately) unit-trace state.
/// Truncated Fock states are admitted with a reported trace deficit.
class DensityMatrix {
  public:
    explicit DensityMatrix(Matrix m, double trace_tol = default_tols().trace_tol,
                           const Tolerances& tols = default_tols());

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& mat() const { return mat_; }
    /// 1 - tr(rho); positive for truncated Fock states, ~0 otherwise.
    double deficit() const { return deficit_; }

  private:
    Matrix mat_;
    double deficit_ = 0.0;
};

struct EigResult {
    RealVector values;   // ascending
    Matrix vectors;      // columns are eigenvectors, unitary
};

EigResult eig_hermitian(const Operator& m, const Tolerances& tols = default_tols());

/// Principal square root of a PSD matrix; eigenvalues in [eig_clip, 0) are clipped.
Operator mat_sqrt_psd(const Operator& m, const Tolerances& tols = default_tols());

Operator mat_exp(const Operator& m);

/// Uhlmann fidelity tr sqrt(sqrt(rho0) rho1 sqrt(rho0)).
double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho1,
                const Tolerances& tols = default_tols());

/// 1/2 * sum |eig(rho0 - rho1)|.
double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1);

double min_eig(const Operator& m, const Tolerances& tols = default_tols());

Operator kron(const Operator& a, const Operator& b);
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace qprobe
