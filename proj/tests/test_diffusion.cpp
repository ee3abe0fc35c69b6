#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <memory>

#include "ifpp/boundary.hpp"
#include "ifpp/diffusion.hpp"
#include "ifpp/math_util.hpp"
#include "ifpp/mc_oracle.hpp"

using namespace ifpp;

namespace {

DiffusionSpec tanh_vol_spec() {
    DiffusionSpec s;
    s.drift = [](double, double) { return 0.0; };
    s.vol = [](double x, double) { return 1.0 + 0.5 * std::tanh(x); };
    s.vol_lower_bound = 0.5;
    s.name = "tanh-vol";
    return s;
}

}  // namespace

TEST_CASE("identity transform for unit volatility") {
    auto tr = make_unit_transform(DiffusionSpec::brownian(), 1e-3);
    for (double x : {-3.0, -0.5, 0.0, 1.2, 7.0}) {
        CHECK(tr.forward(x, 0.3) == doctest::Approx(x).epsilon(1e-12));
        CHECK(tr.transformed_drift(tr.forward(x, 0.3), 0.3) == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("constant scaling: sigma = 2 halves the coordinate and kills all drift terms") {
    DiffusionSpec s;
    s.drift = [](double, double) { return 0.0; };
    s.vol = [](double, double) { return 2.0; };
    s.vol_lower_bound = 2.0;
    auto tr = make_unit_transform(s, 1e-3);
    for (double x : {-2.0, 0.4, 3.0}) {
        CHECK(tr.forward(x, 0.1) == doctest::Approx(x / 2.0).epsilon(1e-12));
    }
    CHECK(tr.transformed_drift(0.5, 0.1) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("forward/inverse round trip to 1e-10") {
    auto tr = make_unit_transform(tanh_vol_spec(), 1e-3);
    for (double t : {0.0, 0.5, 1.0}) {
        for (int k = -10; k <= 10; ++k) {
            double x = 0.45 * k;
            double y = tr.forward(x, t);
            CHECK(tr.inverse(y, t) == doctest::Approx(x).epsilon(1e-10));
        }
    }
}

TEST_CASE("forward map is strictly increasing in x") {
    auto tr = make_unit_transform(tanh_vol_spec(), 1e-3);
    double prev = tr.forward(-4.0, 0.2);
    for (int k = -39; k <= 40; ++k) {
        double y = tr.forward(k * 0.1, 0.2);
        CHECK(y > prev);
        prev = y;
    }
}

TEST_CASE("boundary transforms: identity, scaling, -inf") {
    auto id = make_unit_transform(DiffusionSpec::brownian(), 1e-3);
    auto b = Boundary::piecewise_linear({0.0, 1.0}, {0.2, -0.4}, 1.0);
    auto tb = transform_boundary(id, b);
    for (double t : {0.1, 0.6, 1.0}) CHECK(tb.value(t) == doctest::Approx(b.value(t)).epsilon(1e-12));

    DiffusionSpec s2;
    s2.drift = [](double, double) { return 0.0; };
    s2.vol = [](double, double) { return 2.0; };
    s2.vol_lower_bound = 2.0;
    auto half = transform_boundary(make_unit_transform(s2, 1e-3), Boundary::constant(1.0, 1.0));
    for (double t : {0.2, 0.9}) CHECK(half.value(t) == doctest::Approx(0.5).epsilon(1e-12));

    auto ninf = transform_boundary(id, Boundary::neg_infinity(1.0));
    CHECK(ninf.value(0.5) == kNegInf);
}

TEST_CASE("transition density closed forms match the Gaussian kernel") {
    auto td = TransitionDensity::brownian();
    for (double x : {-1.0, 0.0, 0.7, 2.3}) {
        double exact = std::exp(-(x - 0.5) * (x - 0.5) / (2.0 * 0.75)) /
                       std::sqrt(2.0 * M_PI * 0.75);
        CHECK(td(0.5, 0.25, x, 1.0) == doctest::Approx(exact).epsilon(1e-12));
    }
    auto tdd = TransitionDensity::brownian_with_drift(0.4);
    double m = 0.5 + 0.4 * 0.75;
    for (double x : {-1.0, 0.9}) {
        double exact = std::exp(-(x - m) * (x - m) / (2.0 * 0.75)) / std::sqrt(2.0 * M_PI * 0.75);
        CHECK(tdd(0.5, 0.25, x, 1.0) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("transition density integrates to one over +-8 standard deviations") {
    auto td = TransitionDensity::brownian_with_drift(0.2);
    double s = 0.1, t = 0.9, y = 0.3;
    double sd = std::sqrt(t - s);
    double m = y + 0.2 * (t - s);
    int n = 4000;
    double a = m - 8.0 * sd, b = m + 8.0 * sd, h = (b - a) / n;
    double integral = 0.5 * (td(y, s, a, t) + td(y, s, b, t));
    for (int k = 1; k < n; ++k) integral += td(y, s, a + k * h, t);
    integral *= h;
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("Chapman-Kolmogorov composition within 1e-4") {
    auto td = TransitionDensity::brownian_with_drift(0.3);
    double y = 0.0, s = 0.0, u = 0.4, t = 1.0;
    for (double x : {-0.5, 0.2, 1.0}) {
        int n = 2000;
        double a = -8.0, b = 8.0, h = (b - a) / n;
        double conv = 0.0;
        for (int k = 0; k <= n; ++k) {
            double z = a + k * h;
            double w = (k == 0 || k == n) ? 0.5 : 1.0;
            conv += w * td(y, s, z, u) * td(z, u, x, t);
        }
        conv *= h;
        CHECK(conv == doctest::Approx(td(y, s, x, t)).epsilon(1e-4));
    }
}

TEST_CASE("numeric transition density approaches the Gaussian for Brownian motion") {
    auto td = TransitionDensity::pde_propagated(DiffusionSpec::brownian(), 0.01, 1e-3);
    auto exact = TransitionDensity::brownian();
    for (double x : {0.1, 0.5, 1.0}) {
        CHECK(td(0.2, 0.0, x, 0.5) == doctest::Approx(exact(0.2, 0.0, x, 0.5)).epsilon(2e-3));
    }
}

TEST_CASE("initial distributions: cdf, quantile, density, support") {
    auto pm = InitialDistribution::point_mass(1.5);
    CHECK(pm.cdf(1.4999) == 0.0);
    CHECK(pm.cdf(1.5) == 1.0);
    CHECK(pm.quantile(0.37) == 1.5);
    CHECK(pm.lower_support_edge() == 1.5);

    auto g = InitialDistribution::gaussian(2.0, 0.5);
    CHECK(g.cdf(2.0) == doctest::Approx(0.5));
    CHECK(g.quantile(g.cdf(2.7)) == doctest::Approx(2.7).epsilon(1e-10));
    CHECK(g.density(2.0) == doctest::Approx(normal_pdf(0.0) / 0.5).epsilon(1e-12));
    CHECK(g.lower_support_edge() == kNegInf);

    auto d = InitialDistribution::from_density(
        [](double x) { return normal_pdf(x - 0.5); }, -7.5, 8.5);
    CHECK(d.cdf(0.5) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(d.quantile(0.25) == doctest::Approx(0.5 + normal_quantile(0.25)).epsilon(1e-5));
    CHECK_THROWS_AS(
        InitialDistribution::from_density([](double) { return 2.0; }, 0.0, 1.0).cdf(0.5),
        std::invalid_argument);

    auto c = InitialDistribution::from_cdf([](double x) { return normal_cdf(x / 2.0); }, -60.0,
                                           60.0);
    CHECK(c.kind() == InitKind::cdf);
    CHECK(c.quantile(0.5) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(c.quantile(normal_cdf(1.0)) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("coefficient evaluation failures surface as errors") {
    DiffusionSpec bad;
    bad.drift = [](double, double) { return std::numeric_limits<double>::quiet_NaN(); };
    bad.vol = [](double, double) { return 1.0; };
    bad.vol_lower_bound = 1.0;
    CHECK_THROWS_AS(bad.mu(0.0, 0.0), std::runtime_error);
    DiffusionSpec low;
    low.drift = [](double, double) { return 0.0; };
    low.vol = [](double, double) { return 0.1; };
    low.vol_lower_bound = 1.0;
    CHECK_THROWS_AS(low.sigma(0.0, 0.0), std::runtime_error);
}

// The change of variables preserves crossing probabilities: survival of X
// against b equals survival of Y = Y(X) against the mapped boundary, checked
// by running the Monte Carlo oracle on both sides.
TEST_CASE("unit transform validated by the MC oracle on both sides") {
    auto spec = tanh_vol_spec();
    auto tr = make_unit_transform(spec, 1e-3);
    auto init_x = InitialDistribution::point_mass(1.0);
    auto b = Boundary::constant(0.0, 1.0);

    auto est_x = estimate_survival(spec, init_x, b, 1.0, 60000, 1e-3, 321, true, {0.5, 1.0});

    // mu-tilde is time independent here; tabulate it once so the path loop
    // does not re-run quadratures
    const double ylo = -12.0, yhi = 12.0;
    const int ny = 1200;
    auto table = std::make_shared<std::vector<double>>(ny + 1);
    for (int i = 0; i <= ny; ++i) {
        (*table)[i] = tr.transformed_drift(ylo + (yhi - ylo) * i / ny, 0.0);
    }
    DiffusionSpec unit;
    unit.vol = [](double, double) { return 1.0; };
    unit.vol_lower_bound = 1.0;
    unit.drift = [table, ylo, yhi, ny](double y, double) {
        double idx = std::clamp((y - ylo) / (yhi - ylo) * ny, 0.0, double(ny) - 1e-9);
        int i = static_cast<int>(idx);
        double f = idx - i;
        return (*table)[i] * (1.0 - f) + (*table)[i + 1] * f;
    };
    auto init_y = InitialDistribution::point_mass(tr.forward(1.0, 0.0));
    auto tb = transform_boundary(tr, b);
    auto est_y = estimate_survival(unit, init_y, tb, 1.0, 60000, 1e-3, 321, true, {0.5, 1.0});

    for (size_t i = 0; i < est_x.times.size(); ++i) {
        double gap = std::abs(est_x.p_hat[i] - est_y.p_hat[i]);
        double budget = 3.0 * (est_x.ci_half_width[i] + est_y.ci_half_width[i]) + 2e-3;
        CHECK(gap <= budget);
    }
}
