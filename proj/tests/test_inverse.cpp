#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <memory>

#include "ifpp/analytic.hpp"
#include "ifpp/direct_solver.hpp"
#include "ifpp/inverse_solver.hpp"
#include "ifpp/math_util.hpp"

using namespace ifpp;

namespace {

LatticePtr inverse_lattice(const DiffusionSpec& spec, const InitialDistribution& init,
                           double horizon, double dx = 0.01, double dt = 1e-3) {
    LatticeParams lp;
    lp.dx = dx;
    lp.dt = dt;
    return std::make_shared<Lattice>(make_lattice(spec, init, nullptr, -1, horizon, lp));
}

SurvivalCurve constant_barrier_curve(double x0, double horizon, int n) {
    std::vector<double> t{0.0}, p{1.0};
    for (int j = 1; j <= n; ++j) {
        t.push_back(horizon * j / n);
        p.push_back(bm_constant_barrier_survival(x0, 0.0, t.back()));
    }
    return SurvivalCurve::from_samples(std::move(t), std::move(p));
}

}  // namespace

TEST_CASE("constant survival: obstacle never activates and the boundary is -inf") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto p = SurvivalCurve::from_samples({0.0, 0.5, 1.0}, {1.0, 1.0, 1.0});
    auto lat = inverse_lattice(spec, init, 1.0);
    auto rep = solve_inverse(spec, init, p, lat, 1e-10, {});
    for (size_t j = 1; j < rep.row_times.size(); ++j) {
        CHECK(rep.b_rows[j] == kNegInf);
        CHECK(!rep.row_active[j]);
    }
    CHECK(rep.constraint_violation <= 1e-10);
    // free heat flow: w approaches 1 - p0 of the unkilled marginal
    size_t last = rep.w.rows() - 1;
    double t = rep.w.row_time(last);
    for (int k = 0; k < lat->nx; k += 37) {
        double exact = 1.0 - normal_cdf((lat->x(k) - 1.0) / std::sqrt(t));
        CHECK(rep.w.at(last, k) == doctest::Approx(exact).epsilon(5e-4));
    }
}

TEST_CASE("invalid survival curves are rejected up front") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto lat = inverse_lattice(spec, init, 1.0);
    auto bad = SurvivalCurve::from_samples({0.0, 0.5, 1.0}, {0.9, 0.8, 0.7});
    CHECK_THROWS_AS(solve_inverse(spec, init, bad, lat, 1e-10, {}), std::invalid_argument);
}

TEST_CASE("PSOR non-convergence surfaces as a solver error") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto p = exponential_curve(1.0, 0.5, 101);
    auto lat = inverse_lattice(spec, init, 0.5);
    InverseOptions io;
    io.psor.max_sweeps = 1;
    CHECK_THROWS_AS(solve_inverse(spec, init, p, lat, 1e-10, io), std::runtime_error);
}

TEST_CASE("constant-barrier round trip recovers the barrier") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto p = constant_barrier_curve(1.0, 1.0, 1000);
    auto lat = inverse_lattice(spec, init, 1.0);
    auto rep = solve_inverse(spec, init, p, lat, 1e-10, {});
    for (size_t j = 0; j < rep.row_times.size(); ++j) {
        double t = rep.row_times[j];
        if (t < 0.1) continue;
        CHECK(rep.b_rows[j] != kNegInf);
        CHECK(std::abs(rep.b_rows[j]) <= 0.05);
    }
    CHECK(rep.constraint_violation <= 1e-10);
    CHECK(rep.min_w >= -1e-12);
}

TEST_CASE("level-set extraction on synthetic rows") {
    auto lat = std::make_shared<Lattice>();
    lat->x_min = -1.0;
    lat->x_max = 1.0;
    lat->nx = 201;
    lat->t = {0.0, 0.5, 1.0};
    auto p = SurvivalCurve::from_samples({0.0, 1.0}, {1.0, 0.5});

    SurvivalField w(lat, {0.5, 1.0});
    // row 0: w = p everywhere -> no strict gap -> -inf
    double p05 = p.value(0.5);
    for (int k = 0; k < lat->nx; ++k) w.at(0, k) = p05;
    // row 1: idealized step, w = p for x < 0 and 0 above
    double p1 = p.value(1.0);
    for (int k = 0; k < lat->nx; ++k) w.at(1, k) = lat->x(k) < 0.0 ? p1 : 0.0;

    auto b = extract_boundary(w, p, 1e-8);
    CHECK(b.value(0.5) == kNegInf);
    CHECK(b.value(1.0) == doctest::Approx(0.0).epsilon(0.011));  // within one cell of 0

    // continuation-set identity: {w < p - eps} == {x > b} exactly, per row
    // with a finite extraction (empty rows have no crossing to anchor it)
    for (size_t j = 0; j < w.rows(); ++j) {
        double t = w.row_time(j);
        double psi = p.value(t);
        double eps = 1e-8 * psi;
        double bj = b.value(t);
        if (bj == kNegInf) continue;
        for (int k = 0; k < lat->nx; ++k) {
            bool in_gap = psi - w.at(j, k) > eps;
            bool above = lat->x(k) > bj;
            CHECK(in_gap == above);
        }
    }
    // non-monotone rows are an internal error
    w.at(1, 40) = 2.0;
    CHECK_THROWS_AS(extract_boundary(w, p, 1e-8), std::runtime_error);
}

TEST_CASE("halving the extraction threshold moves the boundary less than a cell") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(1.0);
    auto p = constant_barrier_curve(1.0, 1.0, 1000);
    auto lat = inverse_lattice(spec, init, 1.0);
    InverseOptions io1, io2;
    io1.eps_w_rel = 1e-8;
    io2.eps_w_rel = 5e-9;
    auto r1 = solve_inverse(spec, init, p, lat, 1e-10, io1);
    auto r2 = solve_inverse(spec, init, p, lat, 1e-10, io2);
    for (size_t j = 0; j < r1.row_times.size(); ++j) {
        if (r1.row_times[j] < 0.1) continue;
        CHECK(std::abs(r1.b_rows[j] - r2.b_rows[j]) < lat->dx());
    }
}

TEST_CASE("comparison monotonicity: lower survival means a higher boundary") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto p_fast = exponential_curve(1.0, 1.0, 1001);   // decays faster: p1 <= p2
    auto p_slow = exponential_curve(0.5, 1.0, 1001);
    auto lat = inverse_lattice(spec, init, 1.0);
    auto r_fast = solve_inverse(spec, init, p_fast, lat, 1e-10, {});
    auto r_slow = solve_inverse(spec, init, p_slow, lat, 1e-10, {});
    REQUIRE(r_fast.w.rows() == r_slow.w.rows());
    for (size_t j = 0; j < r_fast.w.rows(); ++j) {
        for (int k = 0; k < lat->nx; k += 23) {
            CHECK(r_fast.w.at(j, k) <= r_slow.w.at(j, k) + 1e-9);
        }
    }
    for (size_t j = 0; j < r_fast.row_times.size(); ++j) {
        if (r_fast.row_times[j] < 0.1) continue;
        if (r_fast.b_rows[j] == kNegInf || r_slow.b_rows[j] == kNegInf) continue;
        CHECK(r_fast.b_rows[j] >= r_slow.b_rows[j] - lat->dx());
    }
}

TEST_CASE("flat plateau: boundary reported -inf strictly inside") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    std::vector<double> ts{0.0}, ps{1.0};
    for (int j = 1; j <= 1000; ++j) {
        double t = j / 1000.0;
        double v = t <= 0.4 ? std::exp(-t)
                            : (t <= 0.6 ? std::exp(-0.4) : std::exp(-0.4 - (t - 0.6)));
        ts.push_back(t);
        ps.push_back(v);
    }
    auto p = SurvivalCurve::from_samples(ts, ps);
    auto lat = inverse_lattice(spec, init, 1.0);
    InverseOptions io;
    io.store_field = false;
    auto rep = solve_inverse(spec, init, p, lat, 1e-10, io);
    for (size_t j = 0; j < rep.row_times.size(); ++j) {
        double t = rep.row_times[j];
        if (t > 0.42 && t < 0.58) CHECK(rep.b_rows[j] == kNegInf);
        if (t > 0.1 && t < 0.38) CHECK(rep.b_rows[j] != kNegInf);
        if (t > 0.65) CHECK(rep.b_rows[j] != kNegInf);
    }
    // continuity diagnostic: decreasing window clean, flat window -inf
    // (flat window margined: the row straddling the plateau edge still
    // absorbs the last of the decrease)
    std::vector<std::pair<double, double>> windows{{0.05, 0.38}, {0.42, 0.58}, {0.62, 1.0}};
    auto cont = continuity_check(p, rep, windows, 1.0);
    CHECK(cont.windows[0].decrease_rate > 0.0);
    CHECK(cont.windows[1].decrease_rate == doctest::Approx(0.0));
    CHECK(cont.windows[1].flat_interior_neg_inf);
    CHECK(cont.windows[2].decrease_rate > 0.0);
}

TEST_CASE("sandwich bound against the unconstrained march") {
    auto spec = DiffusionSpec::brownian();
    auto init = InitialDistribution::point_mass(0.0);
    auto p = exponential_curve(1.0, 1.0, 1001);
    auto lat = inverse_lattice(spec, init, 1.0);
    auto rep = solve_inverse(spec, init, p, lat, 1e-10, {});

    // free march of the same initial data: w_free = 1 - p0 discretely
    auto ones = SurvivalCurve::from_samples({0.0, 1.0}, {1.0, 1.0});
    auto free_rep = solve_inverse(spec, init, ones, lat, 1e-10, {});
    REQUIRE(free_rep.w.rows() == rep.w.rows());
    for (size_t j = 0; j < rep.w.rows(); ++j) {
        double pj = p.value(rep.w.row_time(j));
        for (int k = 0; k < lat->nx; ++k) {
            double gap = free_rep.w.at(j, k) - rep.w.at(j, k);  // = 1 - (w + p0)
            CHECK(gap >= -1e-8);
            CHECK(gap <= 1.0 - pj + 1e-8);
        }
    }
}

TEST_CASE("down-jump diagnostic flags a forced drop") {
    // synthetic report: a boundary with a hard down-step inside an L > 0 window
    auto p = exponential_curve(1.0, 1.0, 101);
    ObstacleSolveReport rep;
    rep.t_min = 0.0;
    for (int j = 0; j <= 100; ++j) {
        double t = j / 100.0;
        rep.row_times.push_back(t);
        rep.b_rows.push_back(t < 0.5 ? 0.0 : -1.0);
    }
    std::vector<std::pair<double, double>> windows{{0.2, 0.9}};
    auto cont = continuity_check(p, rep, windows, 1.0);
    CHECK(cont.windows[0].flagged);
    CHECK(!cont.ok);
}
