#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <memory>

#include "ifpp/analytic.hpp"
#include "ifpp/direct_solver.hpp"
#include "ifpp/math_util.hpp"

using namespace ifpp;

namespace {

LatticePtr coarse_lattice(const DiffusionSpec& spec, const InitialDistribution& init,
                          const Boundary& b, int level, double horizon,
                          std::vector<double> extra = {}) {
    LatticeParams lp;
    lp.dx = 0.01;
    lp.dt = 1e-3;
    lp.extra_times = std::move(extra);
    return std::make_shared<Lattice>(make_lattice(spec, init, &b, level, horizon, lp));
}

}  // namespace

TEST_CASE("no barrier means no killing: p = 1 and the density stays unkilled") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto b = Boundary::neg_infinity(0.5);
    auto lat = coarse_lattice(spec, init, b, 4, 0.5);
    DirectOptions opt;
    opt.with_companion = true;
    auto res = solve_direct_landmark(spec, init, b, 4, lat, opt);
    CHECK(res.stats.kills == 0);
    for (double v : res.p.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    // density identical to the unkilled companion, w = 1 - p0 row by row
    size_t last = res.density.rows() - 1;
    for (int k = 0; k < res.density.nx(); ++k) {
        CHECK(res.density.at(last, k) == res.companion->at(last, k));
    }
    double dx = lat->dx();
    std::vector<double> p0(lat->nx);
    prefix_trapezoid(res.density.row(last), dx, p0);
    for (int k = 0; k < lat->nx; ++k) {
        CHECK(res.survival.at(last, k) + p0[k] == doctest::Approx(res.p.values().back()).epsilon(1e-9));
    }
}

TEST_CASE("constant barrier converges to the reflection value through refinement") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    auto lat = coarse_lattice(spec, init, b, 8, 1.0, {0.5, 1.0});
    auto ref = refine_direct(spec, init, b, 4, 8, lat);
    CHECK(ref.max_monotonicity_violation <= 1e-12);
    for (double t : {0.5, 1.0}) {
        double exact = bm_constant_barrier_survival(1.0, 0.0, t);
        CHECK(std::abs(ref.extrapolated.value(t) - exact) <= 2e-3);
        // raw curves converge from above
        for (size_t i = 0; i + 1 < ref.curves.size(); ++i) {
            CHECK(ref.curves[i].value(t) >= ref.curves[i + 1].value(t) - 1e-12);
        }
        CHECK(ref.curves.back().value(t) >= exact - 1e-3);
    }
}

TEST_CASE("linear barrier against the closed form") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::piecewise_linear({0.0, 1.0}, {0.0, 0.5}, 1.0);
    auto lat = coarse_lattice(spec, init, b, 8, 1.0, {0.5, 1.0});
    auto ref = refine_direct(spec, init, b, 4, 8, lat);
    for (double t : {0.5, 1.0}) {
        double exact = bm_linear_barrier_survival(1.0, 0.0, 0.5, t);
        CHECK(std::abs(ref.extrapolated.value(t) - exact) <= 3e-3);
    }
}

TEST_CASE("field invariants on a killed solve") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    std::vector<double> rows;
    for (int j = 1; j <= 50; ++j) rows.push_back(j / 50.0);
    auto lat = coarse_lattice(spec, init, b, 6, 1.0, rows);
    DirectOptions opt;
    opt.with_companion = true;
    opt.output_times = rows;
    auto res = solve_direct_landmark(spec, init, b, 6, lat, opt);

    CHECK(res.stats.min_density >= -1e-12);
    CHECK(res.stats.max_mass_increase <= 1e-12);
    CHECK(res.stats.max_postkill_flat_gap <= 1e-10);

    double dx = lat->dx();
    std::vector<double> p0(lat->nx);
    for (size_t j = 0; j < res.density.rows(); ++j) {
        double pj = res.p.value(res.density.row_time(j));
        auto u = res.density.row(j);
        auto w = res.survival.row(j);
        prefix_trapezoid(res.companion->row(j), dx, p0);
        // mass bounds against the unkilled companion
        for (int k = 0; k < lat->nx; ++k) {
            CHECK(u[k] >= -1e-12);
            CHECK(u[k] <= res.companion->at(j, k) + 1e-10);
        }
        // w rows are nonincreasing and pin p at the left edge
        for (int k = 1; k < lat->nx; ++k) CHECK(w[k] <= w[k - 1] + 1e-12);
        CHECK(std::abs(w[0] - pj) <= 1e-10);
        CHECK(std::abs(trapezoid(u, dx) - pj) <= 1e-10);
        // sandwich against the companion marginal
        for (int k = 0; k < lat->nx; ++k) {
            double gap = 1.0 - (w[k] + p0[k]);
            CHECK(gap >= -1e-8);
            CHECK(gap <= 1.0 - pj + 1e-8);
        }
    }
}

TEST_CASE("monotone refinement chain for an increasing barrier") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::piecewise_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    auto lat = coarse_lattice(spec, init, b, 7, 1.0);
    auto ref = refine_direct(spec, init, b, 4, 7, lat);
    CHECK(ref.max_monotonicity_violation <= 1e-12);
}

TEST_CASE("semi-continuous dependence: barriers from below") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b0 = Boundary::constant(0.0, 1.0);
    auto lat = coarse_lattice(spec, init, b0, 7, 1.0, {0.5, 1.0});
    DirectOptions opt;
    opt.store_fields = false;
    auto p_limit = solve_direct_landmark(spec, init, b0, 7, lat, opt).p;
    double prev = 1.0;
    for (int m : {4, 8, 16}) {
        auto bm = Boundary::constant(-1.0 / m, 1.0);
        auto pm = solve_direct_landmark(spec, init, bm, 7, lat, opt).p;
        for (double t : {0.5, 1.0}) {
            CHECK(std::abs(pm.value(t) - p_limit.value(t)) <= 2.0 / m + 1e-3);
            CHECK(pm.value(t) >= p_limit.value(t) - 1e-12);  // lower barrier, more survival
        }
        CHECK(pm.value(1.0) <= prev + 1e-12);  // increasing barriers decrease survival
        prev = pm.value(1.0);
    }
}

TEST_CASE("strict and non-strict killing agree away from node-aligned barriers") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0131, 1.0);  // generic level, off the lattice nodes
    auto lat = coarse_lattice(spec, init, b, 6, 1.0, {1.0});
    DirectOptions strict, nonstrict;
    strict.store_fields = nonstrict.store_fields = false;
    strict.weighting = nonstrict.weighting = KillWeighting::whole_node;
    strict.rule = CrossingRule::strict;
    nonstrict.rule = CrossingRule::nonstrict;
    auto ps = solve_direct_landmark(spec, init, b, 6, lat, strict).p;
    auto pn = solve_direct_landmark(spec, init, b, 6, lat, nonstrict).p;
    for (size_t j = 0; j < ps.size(); ++j) {
        CHECK(ps.values()[j] == pn.values()[j]);
    }
    // fractional weighting is invariant to the rule by construction
    strict.weighting = nonstrict.weighting = KillWeighting::fractional;
    auto fs = solve_direct_landmark(spec, init, b, 6, lat, strict).p;
    auto fn = solve_direct_landmark(spec, init, b, 6, lat, nonstrict).p;
    for (size_t j = 0; j < fs.size(); ++j) CHECK(fs.values()[j] == fn.values()[j]);
}

TEST_CASE("fractional killing beats whole-node killing on barrier placement") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0131, 1.0);
    auto lat = coarse_lattice(spec, init, b, 8, 1.0, {1.0});
    double exact = bm_constant_barrier_survival(1.0, 0.0131, 1.0);
    DirectOptions frac, whole;
    frac.store_fields = whole.store_fields = false;
    whole.weighting = KillWeighting::whole_node;
    auto pf = refine_direct(spec, init, b, 5, 8, lat, {frac, 1e-12, 5}).extrapolated.value(1.0);
    RefineOptions wro;
    wro.direct = whole;
    auto pw = refine_direct(spec, init, b, 5, 8, lat, wro).extrapolated.value(1.0);
    CHECK(std::abs(pf - exact) < std::abs(pw - exact));
}

TEST_CASE("missing landmark times are a configuration error") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    auto lat = coarse_lattice(spec, init, b, 3, 1.0);  // built for level 3 only
    CHECK_THROWS_AS(solve_direct_landmark(spec, init, b, 9, lat, {}), std::invalid_argument);
}

TEST_CASE("flux residual: no barrier gives a flat zero curve") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto b = Boundary::neg_infinity(0.5);
    std::vector<double> rows;
    for (int j = 1; j <= 25; ++j) rows.push_back(0.5 * j / 25.0);
    auto lat = coarse_lattice(spec, init, b, 4, 0.5, rows);
    DirectOptions opt;
    opt.output_times = rows;
    auto res = solve_direct_landmark(spec, init, b, 4, lat, opt);
    for (const auto& pt : flux_residual(res.p, res.density, b, spec)) {
        CHECK(std::abs(pt.residual) <= 1e-6);
    }
}

TEST_CASE("flux residual shrinks under refinement and tracks the exact derivative") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);
    // p'(t) for the reflection principle value, differentiated analytically
    auto pdot = [](double t) {
        return -std::exp(-0.5 / t) / std::sqrt(2.0 * M_PI) * std::pow(t, -1.5);
    };
    // refine the kill level together with the grid; the stencil sits just
    // above the regrowth layer of width ~ sqrt(2 * 2^-n / pi)
    struct Rung {
        int level;
        double dx;
    };
    std::vector<Rung> rungs{{8, 0.02}, {10, 0.01}, {12, 0.005}};
    std::vector<double> dxs, rels;
    for (auto r : rungs) {
        double interval = std::ldexp(1.0, -r.level);
        double clearance = std::sqrt(2.0 * interval / M_PI) + 2.0 * r.dx;
        LatticeParams lp;
        lp.dx = r.dx;
        lp.dt = interval / 4.0;
        for (int j = 1; j <= 100; ++j) lp.extra_times.push_back(j / 100.0);
        auto lat = std::make_shared<Lattice>(make_lattice(spec, init, &b, r.level, 1.0, lp));
        DirectOptions opt;
        opt.output_times = lp.extra_times;
        auto res = solve_direct_landmark(spec, init, b, r.level, lat, opt);
        double worst = 0.0;
        for (const auto& pt : flux_residual(res.p, res.density, b, spec, clearance)) {
            if (pt.t < 0.2 || pt.t > 1.0 - 1e-9 || !pt.reliable) continue;
            worst = std::max(worst, std::abs(pt.residual) / std::abs(pdot(pt.t)));
        }
        dxs.push_back(r.dx);
        rels.push_back(worst);
    }
    CHECK(rels.back() <= 0.02);                 // within 2% of |p'| at dx = 0.005
    CHECK(fitted_order(dxs, rels) >= 0.9);      // at least first order along the ladder
}
