#include "qprobe/sources.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace qprobe {

namespace {

// View a B⊗C vector as the dim_b x dim_c coefficient matrix Psi[b,c].
Matrix as_matrix(const Vector& psi, int dim_b, int dim_c) {
    Matrix m(dim_b, dim_c);
    for (int b = 0; b < dim_b; ++b)
        for (int c = 0; c < dim_c; ++c) m(b, c) = psi[b * dim_c + c];
    return m;
}

Vector as_vector(const Matrix& m) {
    Vector v(m.rows() * m.cols());
    for (int b = 0; b < m.rows(); ++b)
        for (int c = 0; c < m.cols(); ++c) v[b * m.cols() + c] = m(b, c);
    return v;
}

}  // namespace

Vector canonical_purification(const DensityMatrix& rho, const Tolerances& tols) {
    EigResult e = eig_hermitian(Operator::hermitian(rho.mat(), tols), tols);
    const int d = rho.dim();
    Matrix psi = Matrix::Zero(d, d);  // columns index C
    for (int k = 0; k < d; ++k) {
        double lam = std::max(e.values[k], 0.0);
        psi.col(k) = std::sqrt(lam) * e.vectors.col(k);
    }
    // psi[b,c] layout
    return as_vector(psi);
}

PurificationPair optimal_purification_pair(const DensityMatrix& rho0,
                                           const DensityMatrix& rho1,
                                           const Tolerances& tols) {
    if (rho0.dim() != rho1.dim())
        throw Error("optimal_purification_pair: dimension mismatch");
    const int d = rho0.dim();
    Vector psi0 = canonical_purification(rho0, tols);
    Vector psi1 = canonical_purification(rho1, tols);
    Matrix m0 = as_matrix(psi0, d, d);
    Matrix m1 = as_matrix(psi1, d, d);
    // <psi1(U)|psi0> = tr(conj(U) m1† m0); polar-align it to tr|m1† m0|.
    Matrix target = m1.adjoint() * m0;
    Eigen::JacobiSVD<Matrix> svd(target, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix w = svd.matrixU() * svd.matrixV().adjoint();  // polar unitary of target
    // conj(U) = w† maximizes the overlap; kernel directions complete via SVD.
    Matrix u = w.adjoint().conjugate();
    Matrix m1u = m1 * u.transpose();
    double overlap = svd.singularValues().sum();
    return {psi0, as_vector(m1u), overlap};
}

PurifiedSource effective_source(const std::vector<Vector>& purifications,
                                const std::vector<double>& probs, int dim_b, int dim_c) {
    if (purifications.size() != 2 || probs.size() != 2)
        throw Error("effective_source: exactly two purifications expected");
    PurifiedSource src;
    src.dim_b = dim_b;
    src.dim_c = dim_c;
    src.purifications = purifications;
    src.overlap = purifications[1].dot(purifications[0]);  // <psi1|psi0>
    const int dbc = dim_b * dim_c;
    src.source_state = Vector::Zero(2 * dbc);
    for (int i = 0; i < 2; ++i)
        src.source_state.segment(i * dbc, dbc) = std::sqrt(probs[i]) * purifications[i];
    // rho_AC block (i,l) = sqrt(p_i p_l) Tr_B |psi_i><psi_l|
    src.rho_ac = Matrix::Zero(2 * dim_c, 2 * dim_c);
    std::vector<Matrix> psi_m;
    for (int i = 0; i < 2; ++i) psi_m.push_back(as_matrix(purifications[i], dim_b, dim_c));
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l) {
            // [c,c'] = sum_b psi_i[b,c] conj(psi_l[b,c'])
            Matrix blk = psi_m[i].transpose() * psi_m[l].conjugate();
            src.rho_ac.block(i * dim_c, l * dim_c, dim_c, dim_c) =
                std::sqrt(probs[i] * probs[l]) * blk;
        }
    return src;
}

PurifiedSource source_from_purifications(const Vector& psi0, const Vector& psi1,
                                         int dim_b, int dim_c) {
    return effective_source({psi0, psi1}, {0.5, 0.5}, dim_b, dim_c);
}

QubitScenario qubit_ensemble(double theta, double phi, const Tolerances& tols) {
    if (theta <= 0.0 || theta >= 3.14159265358979323846)
        throw Error("qubit_ensemble: theta must lie in (0, pi)");
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const Complex ephi = std::exp(Complex(0.0, phi));
    std::vector<Vector> psis;
    for (int i = 0; i < 2; ++i) {
        const double sgn = (i == 0) ? 1.0 : -1.0;
        // (|psi_i^in> ⊗ (|0>+|1>)/√2) through diag(1,1,1,e^{iφ}) on B⊗C
        Vector psi(4);
        psi[0] = c / std::sqrt(2.0);        // |00>
        psi[1] = c / std::sqrt(2.0);        // |01>
        psi[2] = sgn * s / std::sqrt(2.0);  // |10>
        psi[3] = sgn * s / std::sqrt(2.0) * ephi;
        psis.push_back(psi);
    }
    QubitScenario sc;
    sc.source = effective_source(psis, {0.5, 0.5}, 2, 2);
    for (int i = 0; i < 2; ++i) {
        Matrix m = Matrix::Zero(2, 2);
        for (int b = 0; b < 2; ++b)
            for (int b2 = 0; b2 < 2; ++b2)
                for (int cc = 0; cc < 2; ++cc)
                    m(b, b2) += psis[i][b * 2 + cc] * std::conj(psis[i][b2 * 2 + cc]);
        sc.ensemble.states.emplace_back(std::move(m), tols.trace_tol, tols);
    }
    sc.ensemble.probs = {0.5, 0.5};
    return sc;
}

CvScenario cv_ensemble(CvKind kind, const GaussianParams& params, const FockSpace& space,
                       const Tolerances& tols) {
    CvScenario sc;
    if (kind == CvKind::squeezed) {
        sc.ensemble.states.push_back(squeezed_thermal(space, params.r, params.nbar, tols));
        sc.ensemble.states.push_back(squeezed_thermal(space, -params.r, params.nbar, tols));
    } else {
        sc.ensemble.states.push_back(displaced_thermal(space, params.alpha, params.nbar, tols));
        sc.ensemble.states.push_back(displaced_thermal(space, -params.alpha, params.nbar, tols));
    }
    sc.ensemble.probs = {0.5, 0.5};
    PurificationPair pair =
        optimal_purification_pair(sc.ensemble.states[0], sc.ensemble.states[1], tols);
    sc.source = source_from_purifications(pair.psi0, pair.psi1, space.dim(), space.dim());
    return sc;
}

}  // namespace qprobe
