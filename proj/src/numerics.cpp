#include "qprobe/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace qprobe {

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

Operator::Operator(Matrix m, bool hermitian, bool unitary, bool psd,
                   const Tolerances& tols)
    : mat_(std::move(m)), hermitian_(hermitian), unitary_(unitary), psd_(psd) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
        throw Error("Operator: matrix must be square and non-empty");
    if (!mat_.allFinite()) throw Error("Operator: non-finite entries");
    if (hermitian_) {
        const double scale = std::max(max_abs(mat_), 1.0);
        const double dev = max_abs(mat_ - mat_.adjoint().eval());
        if (dev > tols.hermitian_rel * scale)
            throw Error("Operator: hermitian flag violated, deviation " + std::to_string(dev));
    }
    if (unitary_) {
        Matrix g = mat_.adjoint() * mat_;
        g.diagonal().array() -= 1.0;
        const double dev = max_abs(g);
        if (dev > tols.unitary_abs)
            throw Error("Operator: unitary flag violated, deviation " + std::to_string(dev));
    }
    if (psd_) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mat_ + mat_.adjoint().eval()),
                                                 Eigen::EigenvaluesOnly);
        const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
        if (es.eigenvalues()[0] < tols.psd_floor * scale)
            throw Error("Operator: psd flag violated, min eigenvalue " +
                        std::to_string(es.eigenvalues()[0]));
    }
}

Operator Operator::identity(int dim) {
    return Operator(Matrix::Identity(dim, dim), true, true, true);
}

Operator Operator::hermitian(Matrix m, const Tolerances& tols) {
    return Operator(std::move(m), true, false, false, tols);
}

Operator Operator::unitary_op(Matrix m, const Tolerances& tols) {
    return Operator(std::move(m), false, true, false, tols);
}

Operator Operator::psd_op(Matrix m, const Tolerances& tols) {
    return Operator(std::move(m), true, false, true, tols);
}

DensityMatrix::DensityMatrix(Matrix m, double trace_tol, const Tolerances& tols) {
    Operator op = Operator::hermitian(std::move(m), tols);
    const double lo = min_eig(op, tols);
    if (lo < tols.psd_floor)
        throw Error("DensityMatrix: negative eigenvalue " + std::to_string(lo));
    const double tr = op.mat().trace().real();
    deficit_ = 1.0 - tr;
    if (std::abs(deficit_) > trace_tol)
        throw Error("DensityMatrix: trace " + std::to_string(tr) +
                    " outside tolerance " + std::to_string(trace_tol));
    mat_ = op.mat();
}

EigResult eig_hermitian(const Operator& m, const Tolerances& tols) {
    const double scale = std::max(max_abs(m.mat()), 1.0);
    if (max_abs(m.mat() - m.mat().adjoint().eval()) > 1e-9 * scale)
        throw Error("eig_hermitian: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) throw Error("eig_hermitian: solver failed");
    (void)tols;
    return {es.eigenvalues(), es.eigenvectors()};
}

Operator mat_sqrt_psd(const Operator& m, const Tolerances& tols) {
    EigResult e = eig_hermitian(m, tols);
    const double scale = std::max(m.mat().cwiseAbs().maxCoeff(), 1.0);
    RealVector vals = e.values;
    for (int i = 0; i < vals.size(); ++i) {
        if (vals[i] < tols.eig_clip * scale)
            throw Error("mat_sqrt_psd: eigenvalue " + std::to_string(vals[i]) +
                        " is significantly negative");
        vals[i] = std::sqrt(std::max(vals[i], 0.0));
    }
    Matrix r = e.vectors * vals.asDiagonal() * e.vectors.adjoint();
    r = 0.5 * (r + r.adjoint().eval());
    return Operator::psd_op(std::move(r), tols);
}

Operator mat_exp(const Operator& m) {
    if (m.mat().norm() > 1e3)
        throw Error("mat_exp: matrix norm exceeds 1e3, refusing to exponentiate");
    return Operator(m.mat().exp());
}

double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho1,
                const Tolerances& tols) {
    if (rho0.dim() != rho1.dim()) throw Error("fidelity: dimension mismatch");
    Operator s0 = mat_sqrt_psd(Operator::hermitian(rho0.mat(), tols), tols);
    Matrix inner = s0.mat() * rho1.mat() * s0.mat();
    inner = 0.5 * (inner + inner.adjoint().eval());
    // tr sqrt(.) is the sum of square-rooted (clipped) eigenvalues
    Eigen::SelfAdjointEigenSolver<Matrix> es(inner);
    double f = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        f += std::sqrt(std::max(es.eigenvalues()[i], 0.0));
    return std::min(f, 1.0 + 1e-12);
}

double trace_distance(const DensityMatrix& rho0, const DensityMatrix& rho1) {
    if (rho0.dim() != rho1.dim()) throw Error("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho0.mat() - rho1.mat());
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double min_eig(const Operator& m, const Tolerances& tols) {
    return eig_hermitian(m, tols).values.minCoeff();
}

Operator kron(const Operator& a, const Operator& b) {
    Matrix r = Eigen::kroneckerProduct(a.mat(), b.mat());
    return Operator(std::move(r), a.is_hermitian() && b.is_hermitian(),
                    a.is_unitary() && b.is_unitary(), a.is_psd() && b.is_psd());
}

Matrix kron(const Matrix& a, const Matrix& b) {
    return Eigen::kroneckerProduct(a, b);
}

}  // namespace qprobe
