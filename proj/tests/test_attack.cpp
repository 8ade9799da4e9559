#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "oracles.hpp"
#include "qprobe/attack.hpp"
#include "qprobe/verify.hpp"

using namespace qprobe;

TEST_CASE("Helstrom measurement: limiting cases and the overlap formula") {
    FockSpace space{32};
    // identical states: no information, error probability 1/2
    const DensityMatrix th = thermal_state(space, 0.3);
    CHECK(helstrom_error(th, th) == doctest::Approx(0.5).epsilon(1e-10));
    // orthogonal pure states: perfect discrimination
    const Vector f0 = Vector::Unit(space.dim(), 0), f1 = Vector::Unit(space.dim(), 1);
    const DensityMatrix r0((f0 * f0.adjoint()).eval()), r1((f1 * f1.adjoint()).eval());
    CHECK(helstrom_error(r0, r1) < 1e-12);
    // pure states with overlap s: (1 - sqrt(1 - s^2)) / 2
    const double r = 0.5;
    const DensityMatrix s0 = squeezed_thermal(space, r, 0.0);
    const DensityMatrix s1 = squeezed_thermal(space, -r, 0.0);
    const double s = oracles::squeezed_vacuum_overlap(r);
    CHECK(helstrom_error(s0, s1) ==
          doctest::Approx(0.5 * (1.0 - std::sqrt(1.0 - s * s))).epsilon(1e-7));
    // the POVM it is built from is a valid two-outcome measurement
    EbStrategy hel = helstrom_povm(s0, s1);
    hel.validate();
    CHECK(hel.povm.size() == 2);
}

TEST_CASE("variance floor equals half the fidelity") {
    FockSpace space{32};
    const double r = 0.5;
    const DensityMatrix p0 = squeezed_thermal(space, r, 0.0);
    const DensityMatrix p1 = squeezed_thermal(space, -r, 0.0);
    CHECK(fidelity_floor(p0, p1) ==
          doctest::Approx(0.5 * oracles::squeezed_vacuum_overlap(r)).epsilon(1e-7));

    const DensityMatrix m0 = squeezed_thermal(space, 0.5, 0.3);
    const DensityMatrix m1 = squeezed_thermal(space, -0.5, 0.3);
    const double f_oracle = oracles::gaussian_fidelity(oracles::squeezed_thermal_cm(0.5, 0.3),
                                                       oracles::squeezed_thermal_cm(-0.5, 0.3));
    CHECK(fidelity_floor(m0, m1) == doctest::Approx(0.5 * f_oracle).epsilon(1e-6));
}

TEST_CASE("dual boundary: flat region at the floor, rising region A") {
    FockSpace space{24};

    SUBCASE("pure pair has a sharp junction") {
        const DensityMatrix p0 = squeezed_thermal(space, 0.5, 0.0);
        const DensityMatrix p1 = squeezed_thermal(space, -0.5, 0.0);
        const double floor = fidelity_floor(p0, p1);
        const ClassicalBoundary b = lagrange_boundary(p0, p1, {0.6, 0.8, 1.0, 1.8});
        REQUIRE(b.var_p.size() == 4);
        CHECK(b.region_b_level == doctest::Approx(floor).epsilon(1e-7));
        // tight x constraint forces a strictly positive multiplier
        CHECK(b.lambda[0] > 1e-4);
        CHECK_FALSE(b.region_b[0]);
        CHECK(b.var_p[0] > floor + 1e-3);
        // loose constraints collapse exactly onto the flat region
        CHECK(b.region_b[2]);
        CHECK(b.region_b[3]);
        CHECK(b.var_p[3] == doctest::Approx(floor).epsilon(1e-9));
        CHECK(b.region_b_onset <= 1.0 + 1e-12);
    }

    SUBCASE("mixed pair approaches the floor asymptotically") {
        const DensityMatrix m0 = squeezed_thermal(space, 0.5, 0.2);
        const DensityMatrix m1 = squeezed_thermal(space, -0.5, 0.2);
        const double floor = fidelity_floor(m0, m1);
        const ClassicalBoundary b = lagrange_boundary(m0, m1, {0.45, 0.6, 1.0, 1.8});
        REQUIRE(b.var_p.size() == 4);
        CHECK(b.region_b_level == doctest::Approx(floor).epsilon(1e-7));
        // everywhere above the unconditional floor, monotone nonincreasing in c
        for (size_t i = 0; i < b.var_p.size(); ++i) CHECK(b.var_p[i] >= floor - 1e-9);
        CHECK(b.var_p[0] >= b.var_p[1] - 1e-9);
        CHECK(b.var_p[1] >= b.var_p[2] - 1e-9);
        CHECK(b.var_p[2] >= b.var_p[3] - 1e-9);
        CHECK(b.lambda[0] > 1e-4);
        CHECK_FALSE(b.region_b[0]);
        CHECK(b.var_p[0] > floor + 1e-3);
        // the dual multiplier never vanishes for a full-spectrum pair, so the
        // boundary only converges towards the floor at large Var_x
        CHECK_FALSE(b.region_b[3]);
        CHECK(b.lambda[3] > 0.0);
        CHECK(b.var_p[3] == doctest::Approx(floor).epsilon(2e-4));
    }
}

TEST_CASE("direct POVM search reaches the floor and respects constraints") {
    const double r = 0.4;
    const double s = oracles::squeezed_vacuum_overlap(r);
    const auto pts = optimize_povm_pure_squeezed(
        r, {std::numeric_limits<double>::quiet_NaN(), 1.0}, 4, 20100521, FockSpace{16});
    REQUIRE(pts.size() == 2);
    // unconstrained minimum = s/2 (pure-state floor)
    CHECK(pts[0].var_p == doctest::Approx(0.5 * s).scale(1).epsilon(1e-3));
    pts[0].strategy.validate();
    // constrained point meets its Var_x target and stays above the floor
    CHECK(pts[1].var_x == doctest::Approx(1.0).scale(1).epsilon(1e-3));
    CHECK(pts[1].var_p >= 0.5 * s - 1e-6);
    CHECK(pts[1].multistart_spread < 5e-3);
}

TEST_CASE("identical test states admit the vacuum point") {
    // r = 0: both states are vacuum, fidelity 1, and doing nothing is optimal
    const auto pts = optimize_povm_pure_squeezed(
        0.0, {std::numeric_limits<double>::quiet_NaN()}, 4, 7, FockSpace{12});
    CHECK(pts[0].var_p == doctest::Approx(0.5).scale(1).epsilon(2e-4));
}

TEST_CASE("simulated strategies are never flagged quantum") {
    FockSpace space{16};
    const double r = 0.5;
    const CvScenario sc = cv_ensemble(CvKind::squeezed, GaussianParams{r, 0.0, 0.0}, space);
    const DensityMatrix& rho0 = sc.ensemble.states[0];
    const DensityMatrix& rho1 = sc.ensemble.states[1];
    const double s = std::abs(sc.source.overlap);

    // trivial POVM {1} with a vacuum re-preparation
    EbStrategy trivial;
    trivial.povm.push_back(Operator(Matrix::Identity(space.dim(), space.dim())));
    trivial.squeezings = {0.0};
    const MeasuredMoments mm_triv = simulate_eb_cv(trivial, rho0, rho1);
    CHECK(mm_triv.var_x0 == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(mm_triv.var_p0 == doctest::Approx(0.5).epsilon(1e-10));
    // exactly reproducible statistics may sit right on the feasible boundary
    // (t* = 0 up to roundoff), so accept boundary but never quantum
    CHECK(feasibility(template_squeezed(mm_triv, s)).verdict != Verdict::quantum);

    // Helstrom POVM with matched squeezed re-preparations
    EbStrategy hel = helstrom_povm(rho0, rho1);
    hel.squeezings = {r, -r};
    const MeasuredMoments mm_hel = simulate_eb_cv(hel, rho0, rho1);
    mm_hel.validate();
    CHECK(feasibility(template_squeezed(mm_hel, s)).verdict ==
          Verdict::classical_compatible);
    // and the optimum of the re-preparation squeezing obeys the floor
    CHECK(mm_hel.var_p0 >= fidelity_floor(rho0, rho1) - 1e-9);
}

TEST_CASE("discrimination-line diagnostics match the closed form") {
    FockSpace space{40};
    const double r = 0.4, nbar = 0.2;
    const UsdLine line = usd_type_line(r, nbar, {0.0, 0.7, 1.4, 2.0}, space);
    REQUIRE(line.alpha.size() == 4);
    CHECK(line.m_closed[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(line.m_fock[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (size_t i = 0; i < line.alpha.size(); ++i) {
        CHECK(line.m_fock[i] == doctest::Approx(line.m_closed[i]).epsilon(1e-6));
        CHECK(line.kappa[i] > 0.0);
    }
    // log slope in alpha^2 is -2 btilde1
    const double slope = std::log(line.m_closed[3] / line.m_closed[1]) /
                         (std::pow(line.alpha[3], 2) - std::pow(line.alpha[1], 2));
    CHECK(slope == doctest::Approx(-2.0 * line.btilde1).epsilon(1e-10));
}

TEST_CASE("qubit strategy: closed form, orthogonal limit, validity") {
    const double theta = M_PI / 3;
    const QubitEbResult res = qubit_eb_threshold(theta, 0.0);
    const double closed = 1.0 - 1.0 / std::sqrt(1.0 + std::pow(std::cos(theta), 2));
    CHECK(res.p == doctest::Approx(closed).epsilon(1e-10));
    res.strategy.validate();
    REQUIRE(res.strategy.qubit_repreps.size() == 2);

    // mixing phase does not change the threshold
    CHECK(qubit_eb_threshold(theta, M_PI / 2).p == doctest::Approx(res.p).epsilon(1e-10));

    // orthogonal states: perfect discrimination and re-preparation, p = 0
    CHECK(qubit_eb_threshold(M_PI / 2, 0.0).p < 1e-12);

    // the simulated outputs really are the depolarized test states
    const QubitScenario sc = qubit_ensemble(theta, 0.0);
    const auto outs = simulate_eb_qubit(res.strategy, sc.ensemble);
    for (int k = 0; k < 2; ++k) {
        const Matrix want = depolarize(sc.ensemble.states[k], res.p).mat();
        CHECK((outs[k].mat() - want).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("mixed-state distinguishability identity used by the qubit bound") {
    // for the mirror pair cos(t/2)|0> ± sin(t/2)|1> through depolarizing noise,
    // trace distance and fidelity satisfy D = sqrt(1 - F^2) (equal-mixedness
    // saturation of the Fuchs-van de Graaf upper bound)
    const double theta = M_PI / 3;
    for (double p : {0.0, 0.2, 0.5}) {
        const QubitScenario sc = qubit_ensemble(theta, 0.0);
        const DensityMatrix a = depolarize(sc.ensemble.states[0], p);
        const DensityMatrix b = depolarize(sc.ensemble.states[1], p);
        const double d = trace_distance(a, b), f = fidelity(a, b);
        CHECK(d == doctest::Approx(std::sqrt(1.0 - f * f)).epsilon(1e-9));
    }
}

TEST_CASE("strategy validation and serialization") {
    EbStrategy bad;
    Matrix half = 0.5 * Matrix::Identity(2, 2);
    bad.povm.push_back(Operator(half));  // does not sum to identity
    CHECK_THROWS_AS(bad.validate(), Error);

    EbStrategy good;
    good.povm.push_back(Operator(half));
    good.povm.push_back(Operator(half));
    good.squeezings = {0.1, -0.1};
    good.validate();
    const auto j = nlohmann::json::parse(good.to_json());
    CHECK(j["povm"].size() == 2);
    CHECK(j["squeezings"].size() == 2);
}
