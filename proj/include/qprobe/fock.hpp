#pragma once

#include <utility>
#include <vector>

#include "qprobe/numerics.hpp"

namespace qprobe {

/// Truncated single-mode Fock space, basis |0..n_max>.
struct FockSpace {
    int n_max = 16;
    int dim() const { return n_max + 1; }
};

struct GaussianParams {
    double r = 0.0;       // squeezing
    double nbar = 0.0;    // mean thermal photon number
    Complex alpha = 0.0;  // displacement
};

Operator annihilation(const FockSpace& space);

/// (x, p) with vacuum variance 1/2 each and [x,p] = i on the untruncated block.
std::pair<Operator, Operator> quadratures(const FockSpace& space);

/// S(r) = exp[(r/2)(a†² - a²)]; r > 0 squeezes p: Var_{S(r)|0>}(p) = e^{-2r}/2.
Operator squeeze(const FockSpace& space, double r,
                 const Tolerances& tols = default_tols());

/// D(alpha) = exp(alpha a† - alpha* a).
Operator displace(const FockSpace& space, Complex alpha,
                  const Tolerances& tols = default_tols());

/// exp(-i phi n); phi = pi/2 maps x -> p up to sign conventions.
Operator phase_rotation(const FockSpace& space, double phi);

/// Geometric photon-number distribution; not renormalized, deficit reported.
DensityMatrix thermal_state(const FockSpace& space, double nbar,
                            const Tolerances& tols = default_tols());

DensityMatrix squeezed_thermal(const FockSpace& space, double r, double nbar,
                               const Tolerances& tols = default_tols());
DensityMatrix displaced_thermal(const FockSpace& space, Complex alpha, double nbar,
                                const Tolerances& tols = default_tols());

Vector vacuum_state(const FockSpace& space);
Vector coherent_state(const FockSpace& space, Complex alpha,
                      const Tolerances& tols = default_tols());

/// First m non-identity Weyl-Heisenberg unitaries X^a Z^b on dimension d,
/// enumerated row-major in (a, b) skipping (0,0).
std::vector<Operator> generalized_spin_operators(int d, int m);

}  // namespace qprobe
