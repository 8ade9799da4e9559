#pragma once

namespace qprobe {

// All numerical tolerances used across the toolkit, in one place.
struct Tolerances {
    double hermitian_rel = 1e-12;      // max|M - M†| <= hermitian_rel * max|M|
    double unitary_abs = 1e-10;        // max|M†M - 1|
    double psd_floor = -1e-10;         // smallest admissible eigenvalue of a state
    double trace_tol = 1e-9;           // |tr(rho) - 1| for exactly normalized states
    double eig_clip = -1e-9;           // eigenvalues in [eig_clip, 0) are clipped to 0
    double truncation_deficit_max = 1e-6;   // largest tolerated Fock truncation deficit
    double solver_tol = 1e-7;          // absolute accuracy of the feasibility optimum
    double verdict_deadband = 1e-6;    // |t*| below this is reported as "boundary"
    double bisection_width = 1e-4;     // bracket width for boundary scans
};

inline const Tolerances& default_tols() {
    static const Tolerances t{};
    return t;
}

}  // namespace qprobe
