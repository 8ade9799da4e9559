#include "qprobe/evm.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <cmath>
#include <map>
#include <tuple>

namespace qprobe {

namespace {

constexpr Complex kI{0.0, 1.0};

std::vector<int> build_pt_map(int dim, int n_a) {
    if (dim % n_a != 0) throw Error("pt map: dim not divisible by n_a");
    const int blk = dim / n_a;
    std::vector<int> map(dim * dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const int ia = r / blk, rb = r % blk;
            const int la = c / blk, cb = c % blk;
            map[r * dim + c] = (la * blk + rb) * dim + (ia * blk + cb);
        }
    return map;
}

// Incremental template assembly; entries are set on the upper triangle and
// mirrored automatically.
struct Builder {
    EvmTemplate t;
    std::map<std::string, int> index;

    void init(int n_a, int n_b, int n_c, bool b_identity) {
        t.n_a = n_a;
        t.n_b = n_b;
        t.n_c = n_c;
        t.b_has_identity = b_identity;
        t.dim = n_a * n_b * n_c;
        t.fixed = Matrix::Zero(t.dim, t.dim);
        t.provenance = Eigen::MatrixXi::Constant(t.dim, t.dim, int(Provenance::free_entry));
        t.pt_of_entry = build_pt_map(t.dim, n_a);
    }
    void set_fixed(int r, int c, Complex v, Provenance p) {
        t.fixed(r, c) = v;
        t.fixed(c, r) = std::conj(v);
        t.provenance(r, c) = int(p);
        t.provenance(c, r) = int(p);
    }
    int param(const std::string& name) {
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        const int id = int(t.params.size());
        t.params.push_back({name, {}});
        index.emplace(name, id);
        return id;
    }
    void add_term(int id, int r, int c, Complex w) { t.params[id].terms.push_back({r, c, w}); }
    // Free complex entry: two real parameters (re, im) under a shared key.
    // With conjugated=true the entry tracks the conjugate of the shared value.
    void free_complex(const std::string& key, int r, int c, Complex scale = 1.0,
                      bool conjugated = false) {
        add_term(param(key + ".re"), r, c, scale);
        add_term(param(key + ".im"), r, c, (conjugated ? -kI : kI) * scale);
    }
};

const std::vector<Matrix>& pauli_basis() {
    static const std::vector<Matrix> basis = [] {
        std::vector<Matrix> b(4, Matrix::Zero(2, 2));
        b[0] << 1, 0, 0, 1;
        b[1] << 0, 1, 1, 0;
        b[2] << 0, -kI, kI, 0;
        b[3] << 1, 0, 0, -1;
        return b;
    }();
    return basis;
}

struct WeylLabel {
    int a = 0, b = 0;
    Complex phase = 1.0;
};

// Assumes w is proportional to a Weyl operator X^a Z^b.
WeylLabel weyl_label(const Matrix& w) {
    const int d = int(w.rows());
    WeylLabel lab;
    int a = 0;
    w.col(0).cwiseAbs().maxCoeff(&a);
    lab.a = a;
    lab.phase = w(a, 0);
    if (d > 1) {
        const Complex ratio = w((a + 1) % d, 1 % d) / lab.phase;
        const double step = 2.0 * 3.14159265358979323846 / d;
        int b = int(std::lround(std::arg(ratio) / step));
        lab.b = ((b % d) + d) % d;
    }
    return lab;
}

}  // namespace

void MeasuredMoments::validate(const Tolerances& tols) const {
    if (!(var_x0 > 0) || !(var_p0 > 0))
        throw Error("MeasuredMoments: variances must be positive");
    // small slack admits variances estimated in a truncated simulation
    if (var_x0 * var_p0 < 0.25 - 1e-6)
        throw Error("MeasuredMoments: variances violate the uncertainty relation");
    (void)tols;
}

DisplacedMoments DisplacedMoments::symmetric(double a_out, double v) {
    DisplacedMoments m;
    m.mean_x0 = std::sqrt(2.0) * a_out;
    m.mean_x1 = -std::sqrt(2.0) * a_out;
    m.var_x0 = m.var_p0 = m.var_x1 = m.var_p1 = v;
    return m;
}

Matrix EvmTemplate::evaluate(const Eigen::VectorXd& theta) const {
    if (theta.size() != num_params()) throw Error("EvmTemplate: theta size mismatch");
    Matrix m = fixed;
    for (int a = 0; a < num_params(); ++a) {
        for (const FreeTerm& term : params[a].terms) {
            if (term.row == term.col) {
                m(term.row, term.col) += theta[a] * term.weight.real();
            } else {
                m(term.row, term.col) += theta[a] * term.weight;
                m(term.col, term.row) += theta[a] * std::conj(term.weight);
            }
        }
    }
    return m;
}

Matrix EvmTemplate::partial_transpose(const Matrix& m) const {
    Matrix out(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const int e = pt_of_entry[r * dim + c];
            out(e / dim, e % dim) = m(r, c);
        }
    return out;
}

Matrix EvmTemplate::basis_matrix(int a) const {
    Matrix m = Matrix::Zero(dim, dim);
    for (const FreeTerm& term : params[a].terms) {
        if (term.row == term.col) {
            m(term.row, term.col) += term.weight.real();
        } else {
            m(term.row, term.col) += term.weight;
            m(term.col, term.row) += std::conj(term.weight);
        }
    }
    return m;
}

std::string EvmTemplate::to_json() const {
    nlohmann::json j;
    j["dim"] = dim;
    j["n_a"] = n_a;
    j["n_b"] = n_b;
    j["n_c"] = n_c;
    static const char* prov_names[] = {"free", "measured", "source", "commutator"};
    nlohmann::json fixed_entries = nlohmann::json::array();
    for (int r = 0; r < dim; ++r)
        for (int c = r; c < dim; ++c) {
            if (provenance(r, c) == int(Provenance::free_entry) &&
                std::abs(fixed(r, c)) < 1e-15)
                continue;
            fixed_entries.push_back({{"row", r},
                                     {"col", c},
                                     {"re", fixed(r, c).real()},
                                     {"im", fixed(r, c).imag()},
                                     {"provenance", prov_names[provenance(r, c)]}});
        }
    j["fixed"] = fixed_entries;
    nlohmann::json basis = nlohmann::json::array();
    for (int a = 0; a < num_params(); ++a) {
        Matrix m = basis_matrix(a);
        std::vector<double> flat;
        flat.reserve(2 * dim * dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) {
                flat.push_back(m(r, c).real());
                flat.push_back(m(r, c).imag());
            }
        basis.push_back({{"name", params[a].name}, {"dense_row_major", flat}});
    }
    j["basis"] = basis;
    return j.dump();
}

Operator evm_exact(const DensityMatrix& rho, const std::vector<Matrix>& a_ops,
                   const std::vector<Matrix>& b_ops, const std::vector<Matrix>& c_ops) {
    std::vector<Matrix> cs = c_ops;
    const int n_a = int(a_ops.size()), n_b = int(b_ops.size());
    if (n_a == 0 || n_b == 0) throw Error("evm_exact: empty operator set");
    const int da = int(a_ops[0].rows()), db = int(b_ops[0].rows());
    int dc = rho.dim() / (da * db);
    if (da * db * dc != rho.dim()) throw Error("evm_exact: dimension mismatch");
    if (cs.empty()) cs.push_back(Matrix::Identity(dc, dc));
    if (int(cs[0].rows()) != dc) throw Error("evm_exact: C operator dimension mismatch");
    const int n_c = int(cs.size());
    const int dim = n_a * n_b * n_c;
    Matrix chi(dim, dim);
    for (int i = 0; i < n_a; ++i)
        for (int j = 0; j < n_b; ++j)
            for (int k = 0; k < n_c; ++k)
                for (int l = 0; l < n_a; ++l)
                    for (int m = 0; m < n_b; ++m)
                        for (int n = 0; n < n_c; ++n) {
                            const int row = (i * n_b + j) * n_c + k;
                            const int col = (l * n_b + m) * n_c + n;
                            if (col < row) continue;
                            Matrix op = kron(kron(a_ops[i].adjoint() * a_ops[l],
                                                  b_ops[j].adjoint() * b_ops[m]),
                                             cs[k].adjoint() * cs[n]);
                            const Complex v = (rho.mat() * op).trace();
                            chi(row, col) = v;
                            chi(col, row) = std::conj(v);
                        }
    chi = 0.5 * (chi + chi.adjoint().eval());
    return Operator::hermitian(std::move(chi));
}

namespace {

Vector apply_triple(const Vector& psi, const Matrix& a, const Matrix& b, const Matrix& c,
                    int da, int db, int dc) {
    Vector out = Vector::Zero(psi.size());
    // contract each mode in turn; naive loops are fine at these sizes
    Vector tmp = Vector::Zero(psi.size());
    for (int ia = 0; ia < da; ++ia)
        for (int ja = 0; ja < da; ++ja) {
            if (a(ia, ja) == 0.0) continue;
            tmp.segment(ia * db * dc, db * dc) += a(ia, ja) * psi.segment(ja * db * dc, db * dc);
        }
    Vector tmp2 = Vector::Zero(psi.size());
    for (int ia = 0; ia < da; ++ia)
        for (int ib = 0; ib < db; ++ib)
            for (int jb = 0; jb < db; ++jb) {
                if (b(ib, jb) == 0.0) continue;
                tmp2.segment((ia * db + ib) * dc, dc) +=
                    b(ib, jb) * tmp.segment((ia * db + jb) * dc, dc);
            }
    for (int r = 0; r < da * db; ++r) out.segment(r * dc, dc) = c * tmp2.segment(r * dc, dc);
    return out;
}

}  // namespace

Operator evm_exact_pure(const Vector& psi, int dim_a, int dim_b, int dim_c,
                        const std::vector<Matrix>& a_ops, const std::vector<Matrix>& b_ops,
                        const std::vector<Matrix>& c_ops) {
    if (psi.size() != dim_a * dim_b * dim_c) throw Error("evm_exact_pure: dimension mismatch");
    std::vector<Matrix> cs = c_ops;
    if (cs.empty()) cs.push_back(Matrix::Identity(dim_c, dim_c));
    const int n_a = int(a_ops.size()), n_b = int(b_ops.size()), n_c = int(cs.size());
    const int dim = n_a * n_b * n_c;
    // phi_{ijk} = (A_i ⊗ B_j ⊗ C_k)|psi>; entry = <phi_ijk|phi_lmn>
    std::vector<Vector> phi(dim);
    for (int i = 0; i < n_a; ++i)
        for (int j = 0; j < n_b; ++j)
            for (int k = 0; k < n_c; ++k)
                phi[(i * n_b + j) * n_c + k] =
                    apply_triple(psi, a_ops[i], b_ops[j], cs[k], dim_a, dim_b, dim_c);
    Matrix chi(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = r; c < dim; ++c) {
            chi(r, c) = phi[r].dot(phi[c]);
            chi(c, r) = std::conj(chi(r, c));
        }
    return Operator::hermitian(std::move(chi));
}

Matrix block_partial_transpose(const Matrix& chi, int n_a) {
    const int dim = int(chi.rows());
    const std::vector<int> map = build_pt_map(dim, n_a);
    Matrix out(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const int e = map[r * dim + c];
            out(e / dim, e % dim) = chi(r, c);
        }
    return out;
}

EvmTemplate template_squeezed(const MeasuredMoments& moments, double s,
                              const Tolerances& tols) {
    moments.validate(tols);
    s = std::min(std::max(s, 0.0), 1.0);
    Builder b;
    b.init(2, 2, 1, false);
    const double vx = moments.var_x0, vp = moments.var_p0;
    // row order (0x, 0p, 1x, 1p)
    b.set_fixed(0, 0, vx, Provenance::measured);
    b.set_fixed(1, 1, vp, Provenance::measured);
    b.set_fixed(2, 2, vp, Provenance::measured);
    b.set_fixed(3, 3, vx, Provenance::measured);
    b.set_fixed(0, 1, 0.5 * kI, Provenance::commutator);
    b.set_fixed(2, 3, 0.5 * kI, Provenance::commutator);
    b.set_fixed(0, 3, 0.5 * kI * s, Provenance::source);
    b.set_fixed(1, 2, -0.5 * kI * s, Provenance::source);
    b.add_term(b.param("b1"), 0, 1, 1.0);
    b.add_term(b.param("b2"), 2, 3, 1.0);
    b.free_complex("c1", 0, 2);
    {
        const int re = b.param("c2.re"), im = b.param("c2.im");
        b.add_term(re, 0, 3, 1.0);
        b.add_term(re, 1, 2, 1.0);
        b.add_term(im, 0, 3, kI);
        b.add_term(im, 1, 2, kI);
    }
    b.free_complex("c3", 1, 3);
    return b.t;
}

namespace {

// Shared 6x6 builder over B = {1, x, p} given per-state first/second moments.
EvmTemplate template_b1xp(double mx0, double mp0, double xx0, double pp0, double mx1,
                          double mp1, double xx1, double pp1, double s) {
    s = std::min(std::max(s, 0.0), 1.0);
    Builder b;
    b.init(2, 3, 1, true);
    auto blk = [&](int i, double mx, double mp, double xx, double pp,
                   const std::string& bname) {
        const int o = 3 * i;
        b.set_fixed(o + 0, o + 0, 1.0, Provenance::measured);
        b.set_fixed(o + 0, o + 1, mx, Provenance::measured);
        b.set_fixed(o + 0, o + 2, mp, Provenance::measured);
        b.set_fixed(o + 1, o + 1, xx, Provenance::measured);
        b.set_fixed(o + 2, o + 2, pp, Provenance::measured);
        b.set_fixed(o + 1, o + 2, 0.5 * kI, Provenance::commutator);
        b.add_term(b.param(bname), o + 1, o + 2, 1.0);
    };
    blk(0, mx0, mp0, xx0, pp0, "b1");
    blk(1, mx1, mp1, xx1, pp1, "b2");
    // cross block, rows (0,j) cols (1,m)
    b.set_fixed(0, 3, s, Provenance::source);
    b.free_complex("cross_x", 0, 4);
    b.free_complex("cross_x", 1, 3);
    b.free_complex("cross_p", 0, 5);
    b.free_complex("cross_p", 2, 3);
    b.free_complex("c1", 1, 4);
    b.set_fixed(1, 5, 0.5 * kI * s, Provenance::source);
    b.set_fixed(2, 4, -0.5 * kI * s, Provenance::source);
    b.free_complex("c2", 1, 5);
    b.free_complex("c2", 2, 4);
    b.free_complex("c3", 2, 5);
    return b.t;
}

}  // namespace

EvmTemplate template_squeezed_with_identity(const MeasuredMoments& moments, double s,
                                            const Tolerances& tols) {
    moments.validate(tols);
    return template_b1xp(0, 0, moments.var_x0, moments.var_p0, 0, 0, moments.var_p0,
                         moments.var_x0, s);
}

EvmTemplate template_displaced(const DisplacedMoments& m, double s, const Tolerances& tols) {
    for (double v : {m.var_x0, m.var_p0, m.var_x1, m.var_p1})
        if (v < 0.5 - 1e-9) throw Error("template_displaced: variance below vacuum floor");
    (void)tols;
    return template_b1xp(m.mean_x0, m.mean_p0, m.var_x0 + m.mean_x0 * m.mean_x0,
                         m.var_p0 + m.mean_p0 * m.mean_p0, m.mean_x1, m.mean_p1,
                         m.var_x1 + m.mean_x1 * m.mean_x1, m.var_p1 + m.mean_p1 * m.mean_p1,
                         s);
}

EvmTemplate template_with_C_unitaries(const EvmTemplate& base, const PurifiedSource& source,
                                      const std::vector<Operator>& c_ops) {
    if (!base.b_has_identity)
        throw Error("template_with_C_unitaries: base B set must include the identity");
    if (base.n_c != 1 || base.n_a != 2)
        throw Error("template_with_C_unitaries: base must be bipartite with trivial C");
    if (c_ops.empty()) return base;
    const int dc = source.dim_c;
    const int n_b = base.n_b;
    const int n_c = 1 + int(c_ops.size());
    for (const Operator& u : c_ops)
        if (u.dim() != dc) throw Error("template_with_C_unitaries: C operator dim mismatch");

    std::vector<Matrix> cset;
    cset.push_back(Matrix::Identity(dc, dc));
    for (const Operator& u : c_ops) cset.push_back(u.mat());

    Builder b;
    b.init(2, n_b, n_c, true);
    auto row_of = [&](int i, int j, int k) { return (i * n_b + j) * n_c + k; };

    // inherit the base: every C-diagonal (k = n) block repeats the base template
    std::vector<int> base_param_of(base.num_params());
    for (int a = 0; a < base.num_params(); ++a)
        base_param_of[a] = b.param(base.params[a].name);
    for (int k = 0; k < n_c; ++k) {
        for (int rb = 0; rb < base.dim; ++rb)
            for (int cb = rb; cb < base.dim; ++cb) {
                const int r = row_of(rb / n_b, rb % n_b, k);
                const int c = row_of(cb / n_b, cb % n_b, k);
                if (base.provenance(rb, cb) != int(Provenance::free_entry) ||
                    std::abs(base.fixed(rb, cb)) > 0)
                    b.set_fixed(r, c, base.fixed(rb, cb), Provenance(base.provenance(rb, cb)));
            }
        for (int a = 0; a < base.num_params(); ++a)
            for (const FreeTerm& term : base.params[a].terms)
                b.add_term(base_param_of[a], row_of(term.row / n_b, term.row % n_b, k),
                           row_of(term.col / n_b, term.col % n_b, k), term.weight);
    }

    // products C_k† C_n for k != n, with their Weyl labels
    auto src_val = [&](int i, int l, const Matrix& w) -> Complex {
        Matrix e = Matrix::Zero(2, 2);
        e(i, l) = 1.0;
        return 2.0 * (source.rho_ac * kron(e, w)).trace();
    };
    // Entries coupling distinct C unitaries. Each free entry is
    // Tr(rho (|i><l| ⊗ G ⊗ W)) with Hermitian B-part G; entries whose
    // operators are equal (up to Weyl phase) share a complex parameter, and
    // adjoint-related operators reference the conjugate of the same parameter.
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < 2; ++i)
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < n_c; ++k)
                for (int n = 0; n < n_c; ++n) {
                    if (k == n) continue;
                    const Matrix w = cset[k].adjoint() * cset[n];
                    const WeylLabel lab = weyl_label(w);
                    // (X^a Z^b)† = ω^{ab} X^{d-a} Z^{d-b}
                    const int aj = (dc - lab.a) % dc, bj = (dc - lab.b) % dc;
                    const Complex omega_ab =
                        std::exp(kI * (two_pi * double(lab.a) * double(lab.b) / dc));
                    const bool use_adjoint =
                        std::tie(l, i, aj, bj) < std::tie(i, l, lab.a, lab.b);
                    if (std::tie(l, i, aj, bj) == std::tie(i, l, lab.a, lab.b))
                        throw Error("template_with_C_unitaries: self-adjoint C product");
                    const std::string ckey =
                        use_adjoint ? "w" + std::to_string(aj) + "_" + std::to_string(bj) +
                                          "_a" + std::to_string(l) + std::to_string(i)
                                    : "w" + std::to_string(lab.a) + "_" +
                                          std::to_string(lab.b) + "_a" + std::to_string(i) +
                                          std::to_string(l);
                    const Complex scale =
                        use_adjoint ? lab.phase * std::conj(omega_ab) : lab.phase;
                    for (int j = 0; j < n_b; ++j)
                        for (int m = 0; m < n_b; ++m) {
                            const int r = row_of(i, j, k), c = row_of(l, m, n);
                            if (c <= r) continue;  // mirror handled via hermiticity
                            if (j == 0 && m == 0) {
                                b.set_fixed(r, c, src_val(i, l, w), Provenance::source);
                            } else if ((j == 1 && m == 2) || (j == 2 && m == 1)) {
                                // <xp ⊗ W> = sym + (i/2)<1 ⊗ W>; <px ⊗ W> = sym - (i/2)<1 ⊗ W>
                                const double sgn = (j == 1) ? 1.0 : -1.0;
                                b.t.fixed(r, c) += sgn * 0.5 * kI * src_val(i, l, w);
                                b.t.fixed(c, r) = std::conj(b.t.fixed(r, c));
                                b.t.provenance(r, c) = int(Provenance::source);
                                b.t.provenance(c, r) = int(Provenance::source);
                                b.free_complex(ckey + "_sym", r, c, scale, use_adjoint);
                            } else {
                                std::string blab = (j == 0 || m == 0)
                                                       ? "B" + std::to_string(j + m)
                                                       : "B" + std::to_string(j) +
                                                             std::to_string(m);
                                b.free_complex(ckey + "_" + blab, r, c, scale, use_adjoint);
                            }
                        }
                }
    return b.t;
}

EvmTemplate hermitian_affine_family(int dim, int n_a,
                                    const std::vector<std::pair<Matrix, double>>& constraints) {
    const int ncoord = dim * dim;
    auto off_index = [&](int r, int c) {
        // packed offset of the (r,c), r<c pair among upper-triangle entries
        int idx = 0;
        for (int rr = 0; rr < r; ++rr) idx += dim - rr - 1;
        return dim + 2 * (idx + (c - r - 1));
    };
    Eigen::MatrixXd a(int(constraints.size()), ncoord);
    Eigen::VectorXd rhs(int(constraints.size()));
    for (int row = 0; row < int(constraints.size()); ++row) {
        const Matrix& k = constraints[row].first;
        if (k.rows() != dim) throw Error("hermitian_affine_family: constraint dim mismatch");
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(ncoord);
        for (int r = 0; r < dim; ++r) coeff[r] = k(r, r).real();
        for (int r = 0; r < dim; ++r)
            for (int c = r + 1; c < dim; ++c) {
                coeff[off_index(r, c)] = 2.0 * k(c, r).real();
                coeff[off_index(r, c) + 1] = -2.0 * k(c, r).imag();
            }
        a.row(row) = coeff;
        rhs[row] = constraints[row].second;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    const double cutoff = std::max(smax, 1.0) * 1e-12;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > cutoff) ++rank;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ncoord);
    Eigen::VectorXd utb = svd.matrixU().adjoint() * rhs;
    for (int i = 0; i < rank; ++i)
        x += (utb[i] / svd.singularValues()[i]) * svd.matrixV().col(i);
    const double residual = (a * x - rhs).norm();
    if (residual > 1e-8 * std::max(1.0, rhs.norm()))
        throw Error("hermitian_affine_family: inconsistent constraints, residual " +
                    std::to_string(residual));

    auto unpack = [&](const Eigen::VectorXd& v) {
        Matrix m = Matrix::Zero(dim, dim);
        for (int r = 0; r < dim; ++r) m(r, r) = v[r];
        for (int r = 0; r < dim; ++r)
            for (int c = r + 1; c < dim; ++c) {
                m(r, c) = Complex(v[off_index(r, c)], v[off_index(r, c) + 1]);
                m(c, r) = std::conj(m(r, c));
            }
        return m;
    };

    EvmTemplate t;
    t.n_a = n_a;
    t.n_b = dim / n_a;
    t.n_c = 1;
    t.dim = dim;
    t.fixed = unpack(x);
    t.provenance = Eigen::MatrixXi::Constant(dim, dim, int(Provenance::measured));
    t.pt_of_entry = build_pt_map(dim, n_a);
    for (int i = rank; i < int(svd.matrixV().cols()); ++i) {
        Matrix m = unpack(svd.matrixV().col(i));
        FreeParam p;
        p.name = "n" + std::to_string(i - rank);
        for (int r = 0; r < dim; ++r)
            for (int c = r; c < dim; ++c)
                if (std::abs(m(r, c)) > 1e-14) p.terms.push_back({r, c, m(r, c)});
        t.params.push_back(std::move(p));
    }
    return t;
}

EvmTemplate template_qubit(const DensityMatrix& out0, const DensityMatrix& out1,
                           const PurifiedSource& source, bool include_c,
                           const Tolerances& tols) {
    if (out0.dim() != 2 || out1.dim() != 2) throw Error("template_qubit: outputs must be qubits");
    (void)tols;
    const auto& pb = pauli_basis();
    std::vector<std::pair<Matrix, double>> constraints;
    const Matrix i2 = Matrix::Identity(2, 2);
    const std::vector<const DensityMatrix*> outs = {&out0, &out1};
    if (!include_c) {
        // rho_AB on 4 dims: diagonal A-blocks are p_i rho_i^out, Tr_B rho = rho_A
        for (int i = 0; i < 2; ++i)
            for (const Matrix& p : pb) {
                Matrix e = Matrix::Zero(2, 2);
                e(i, i) = 1.0;
                constraints.push_back(
                    {kron(e, p), 0.5 * (outs[i]->mat() * p).trace().real()});
            }
        // rho_A = Tr_C rho_AC
        Matrix rho_a = Matrix::Zero(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int l = 0; l < 2; ++l)
                rho_a(i, l) = source.rho_ac
                                  .block(i * source.dim_c, l * source.dim_c, source.dim_c,
                                         source.dim_c)
                                  .trace();
        for (const Matrix& p : pb)
            constraints.push_back({kron(p, i2), (rho_a * p).trace().real()});
        return hermitian_affine_family(4, 2, constraints);
    }
    if (source.dim_c != 2) throw Error("template_qubit: include_c needs a qubit C system");
    for (int i = 0; i < 2; ++i)
        for (const Matrix& p : pb) {
            Matrix e = Matrix::Zero(2, 2);
            e(i, i) = 1.0;
            constraints.push_back(
                {kron(kron(e, p), i2), 0.5 * (outs[i]->mat() * p).trace().real()});
        }
    for (const Matrix& pa : pb)
        for (const Matrix& pc : pb)
            constraints.push_back(
                {kron(kron(pa, i2), pc), (source.rho_ac * kron(pa, pc)).trace().real()});
    return hermitian_affine_family(8, 2, constraints);
}

}  // namespace qprobe
