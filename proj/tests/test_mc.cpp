#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ifpp/analytic.hpp"
#include "ifpp/mc_oracle.hpp"

using namespace ifpp;

TEST_CASE("no barrier: survival is exactly one with no disagreements") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto b = Boundary::neg_infinity(1.0);
    auto est = estimate_survival(spec, init, b, 1.0, 5000, 1e-2, 1, true);
    for (double v : est.p_hat) CHECK(v == 1.0);
    for (double v : est.p_strict) CHECK(v == 1.0);
    CHECK(est.strict_nonstrict_disagreements == 0);
}

TEST_CASE("same seed gives bitwise-identical estimates") {
    auto spec = DiffusionSpec::brownian_with_drift(0.1);
    auto init = InitialDistribution::gaussian(1.0, 0.2);
    auto b = Boundary::constant(0.0, 1.0);
    auto a = estimate_survival(spec, init, b, 1.0, 20000, 1e-2, 777, true, {0.5, 1.0});
    auto c = estimate_survival(spec, init, b, 1.0, 20000, 1e-2, 777, true, {0.5, 1.0});
    for (size_t i = 0; i < a.p_hat.size(); ++i) {
        CHECK(a.p_hat[i] == c.p_hat[i]);
        CHECK(a.ci_half_width[i] == c.ci_half_width[i]);
    }
    auto d = estimate_survival(spec, init, b, 1.0, 20000, 1e-2, 778, true, {0.5, 1.0});
    CHECK(a.p_hat[0] != d.p_hat[0]);
}

TEST_CASE("bridge-corrected estimate hits the reflection value") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    auto est = estimate_survival(spec, init, b, 1.0, 200000, 1e-3, 987, true, {0.25, 0.5, 1.0});
    for (size_t i = 0; i < est.times.size(); ++i) {
        double exact = bm_constant_barrier_survival(1.0, 0.0, est.times[i]);
        CHECK(std::abs(est.p_hat[i] - exact) <= 3.0 * est.ci_half_width[i] + 5e-4);
        CHECK(est.p_hat[i] >= 0.0);
        CHECK(est.p_hat[i] <= 1.0);
        if (i) CHECK(est.p_hat[i] <= est.p_hat[i - 1]);  // pathwise-monotone weights
    }
    CHECK(est.strict_nonstrict_disagreements == 0);
}

TEST_CASE("discrete monitoring overestimates survival relative to the bridge") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    auto est = estimate_survival(spec, init, b, 1.0, 50000, 5e-3, 31, true, {0.5, 1.0});
    for (size_t i = 0; i < est.times.size(); ++i) {
        // pathwise: the bridge weight never exceeds the discrete indicator
        CHECK(est.p_hat[i] <= est.p_nonstrict[i] + 1e-15);
        // and the gap is the macroscopic monitoring bias at this coarse dt
        CHECK(est.p_nonstrict[i] - est.p_hat[i] > 5.0 * est.ci_half_width[i] / 3.0);
    }
}

TEST_CASE("confidence width shrinks like one over root n") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    auto small = estimate_survival(spec, init, b, 1.0, 20000, 5e-3, 5, true, {1.0});
    auto big = estimate_survival(spec, init, b, 1.0, 80000, 5e-3, 5, true, {1.0});
    double ratio = 2.0 * big.ci_half_width[0] / small.ci_half_width[0];
    CHECK(ratio >= 0.85);
    CHECK(ratio <= 1.15);
}

TEST_CASE("linear barrier against the corrected closed form") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::piecewise_linear({0.0, 1.0}, {0.0, 0.5}, 1.0);
    auto est = estimate_survival(spec, init, b, 1.0, 200000, 1e-3, 246, true, {0.5, 1.0});
    for (size_t i = 0; i < est.times.size(); ++i) {
        double exact = bm_linear_barrier_survival(1.0, 0.0, 0.5, est.times[i]);
        CHECK(std::abs(est.p_hat[i] - exact) <= 3.0 * est.ci_half_width[i] + 1e-3);
    }
}

TEST_CASE("partial -inf segments never kill") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.5);
    // barrier only active on [0.5, 1]
    auto b = Boundary::piecewise_linear({0.0, 0.499, 0.5, 1.0}, {kNegInf, kNegInf, 0.0, 0.0}, 1.0);
    auto est = estimate_survival(spec, init, b, 1.0, 20000, 1e-2, 4, true, {0.25, 0.45, 1.0});
    CHECK(est.p_hat[0] == 1.0);
    CHECK(est.p_hat[1] == 1.0);
    CHECK(est.p_hat[2] < 1.0);
}

TEST_CASE("preconditions are enforced") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto b = Boundary::neg_infinity(1.0);
    CHECK_THROWS_AS(estimate_survival(spec, init, b, 1.0, 500, 1e-3, 1, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_survival(spec, init, b, 1.0, 5000, 0.05, 1, false),
                    std::invalid_argument);
}

TEST_CASE("exploding coefficients surface as a blow-up error") {
    DiffusionSpec bad;
    bad.drift = [](double x, double) { return x * 1e155; };
    bad.vol = [](double, double) { return 1.0; };
    bad.vol_lower_bound = 1.0;
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::neg_infinity(1.0);
    CHECK_THROWS_AS(estimate_survival(bad, init, b, 1.0, 1000, 1e-2, 1, false),
                    std::runtime_error);
}
