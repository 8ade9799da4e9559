#include "qprobe/fock.hpp"

#include <cmath>

namespace qprobe {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_state_deficit(const char* who, double deficit, const Tolerances& tols) {
    if (deficit > tols.truncation_deficit_max)
        throw Error(std::string(who) + ": truncation deficit " + std::to_string(deficit) +
                    " too large; increase n_max");
}

}  // namespace

Operator annihilation(const FockSpace& space) {
    const int d = space.dim();
    if (d < 2) throw Error("annihilation: need dim >= 2");
    Matrix a = Matrix::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
    return Operator(std::move(a));
}

std::pair<Operator, Operator> quadratures(const FockSpace& space) {
    const Matrix a = annihilation(space).mat();
    const Matrix ad = a.adjoint();
    Matrix x = (a + ad) / std::sqrt(2.0);
    Matrix p = (a - ad) / (Complex(0.0, 1.0) * std::sqrt(2.0));
    return {Operator::hermitian(std::move(x)), Operator::hermitian(std::move(p))};
}

Operator squeeze(const FockSpace& space, double r, const Tolerances& tols) {
    if (std::abs(r) > 1.5 && space.n_max <= 16)
        throw Error("squeeze: |r| > 1.5 is not representable at n_max = 16");
    const Matrix a = annihilation(space).mat();
    const Matrix ad = a.adjoint();
    Matrix gen = 0.5 * r * (ad * ad - a * a);
    Matrix s = mat_exp(Operator(std::move(gen))).mat();
    // Deficit of S(r)|0> relative to the untruncated squeezed vacuum.
    double norm0 = s.col(0).squaredNorm();
    check_state_deficit("squeeze", 1.0 - norm0, tols);
    return Operator::unitary_op(std::move(s), tols);
}

Operator displace(const FockSpace& space, Complex alpha, const Tolerances& tols) {
    if (std::norm(alpha) > space.n_max / 4.0)
        throw Error("displace: |alpha|^2 exceeds n_max/4");
    const Matrix a = annihilation(space).mat();
    Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
    Matrix d = mat_exp(Operator(std::move(gen))).mat();
    double norm0 = d.col(0).squaredNorm();
    check_state_deficit("displace", 1.0 - norm0, tols);
    return Operator::unitary_op(std::move(d), tols);
}

Operator phase_rotation(const FockSpace& space, double phi) {
    const int d = space.dim();
    Matrix u = Matrix::Zero(d, d);
    for (int n = 0; n < d; ++n) u(n, n) = std::exp(Complex(0.0, -phi * n));
    return Operator::unitary_op(std::move(u));
}

DensityMatrix thermal_state(const FockSpace& space, double nbar, const Tolerances& tols) {
    if (nbar < 0) throw Error("thermal_state: nbar must be >= 0");
    const int d = space.dim();
    Matrix rho = Matrix::Zero(d, d);
    double total = 0.0;
    for (int n = 0; n < d; ++n) {
        double w = (nbar == 0.0) ? (n == 0 ? 1.0 : 0.0)
                                 : std::pow(nbar / (nbar + 1.0), n) / (nbar + 1.0);
        rho(n, n) = w;
        total += w;
    }
    check_state_deficit("thermal_state", 1.0 - total, tols);
    return DensityMatrix(std::move(rho), tols.truncation_deficit_max, tols);
}

DensityMatrix squeezed_thermal(const FockSpace& space, double r, double nbar,
                               const Tolerances& tols) {
    DensityMatrix th = thermal_state(space, nbar, tols);
    Matrix s = squeeze(space, r, tols).mat();
    Matrix rho = s * th.mat() * s.adjoint();
    return DensityMatrix(std::move(rho), tols.truncation_deficit_max, tols);
}

DensityMatrix displaced_thermal(const FockSpace& space, Complex alpha, double nbar,
                                const Tolerances& tols) {
    DensityMatrix th = thermal_state(space, nbar, tols);
    Matrix d = displace(space, alpha, tols).mat();
    Matrix rho = d * th.mat() * d.adjoint();
    return DensityMatrix(std::move(rho), tols.truncation_deficit_max, tols);
}

Vector vacuum_state(const FockSpace& space) {
    Vector v = Vector::Zero(space.dim());
    v[0] = 1.0;
    return v;
}

Vector coherent_state(const FockSpace& space, Complex alpha, const Tolerances& tols) {
    return displace(space, alpha, tols).mat().col(0);
}

std::vector<Operator> generalized_spin_operators(int d, int m) {
    if (d < 2) throw Error("generalized_spin_operators: d must be >= 2");
    if (m < 1 || m > d * d - 1)
        throw Error("generalized_spin_operators: m out of range [1, d^2-1]");
    Matrix x = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) x((k + 1) % d, k) = 1.0;
    const Complex omega = std::exp(Complex(0.0, 2.0 * kPi / d));
    std::vector<Operator> ops;
    ops.reserve(m);
    for (int a = 0; a < d && int(ops.size()) < m; ++a) {
        Matrix xa = Matrix::Identity(d, d);
        for (int t = 0; t < a; ++t) xa = x * xa;
        for (int b = 0; b < d && int(ops.size()) < m; ++b) {
            if (a == 0 && b == 0) continue;
            Matrix u = xa;
            for (int k = 0; k < d; ++k) u.col(k) *= std::pow(omega, double(b) * k);
            ops.emplace_back(Operator::unitary_op(std::move(u)));
        }
    }
    return ops;
}

}  // namespace qprobe
