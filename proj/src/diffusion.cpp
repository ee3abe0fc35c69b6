#include "ifpp/diffusion.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ifpp/boundary.hpp"
#include "ifpp/grid.hpp"

namespace ifpp {

double DiffusionSpec::mu(double x, double t) const {
    double v = drift(x, t);
    if (!std::isfinite(v)) {
        throw std::runtime_error("coefficient evaluation: drift not finite at (" +
                                 std::to_string(x) + ", " + std::to_string(t) + ")");
    }
    return v;
}

double DiffusionSpec::sigma(double x, double t) const {
    double v = vol(x, t);
    if (!std::isfinite(v)) {
        throw std::runtime_error("coefficient evaluation: vol not finite at (" +
                                 std::to_string(x) + ", " + std::to_string(t) + ")");
    }
    if (v < vol_lower_bound) {
        throw std::runtime_error("coefficient evaluation: vol below its declared lower bound");
    }
    return v;
}

DiffusionSpec DiffusionSpec::brownian() {
    DiffusionSpec s;
    s.drift = [](double, double) { return 0.0; };
    s.vol = [](double, double) { return 1.0; };
    s.vol_lower_bound = 1.0;
    s.bound_m = 0.0;
    s.name = "bm";
    return s;
}

DiffusionSpec DiffusionSpec::brownian_with_drift(double c) {
    DiffusionSpec s;
    s.drift = [c](double, double) { return c; };
    s.vol = [](double, double) { return 1.0; };
    s.vol_lower_bound = 1.0;
    s.bound_m = std::abs(c);
    s.name = "bm-drift";
    return s;
}

// ---------------------------------------------------------------------------
// InitialDistribution

InitialDistribution InitialDistribution::point_mass(double x0) {
    InitialDistribution d;
    d.kind_ = InitKind::point_mass;
    d.x0_ = x0;
    d.cdf_ = [x0](double x) { return x < x0 ? 0.0 : 1.0; };
    d.lo_ = x0;
    d.hi_ = x0;
    return d;
}

InitialDistribution InitialDistribution::gaussian(double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("gaussian initial law: sd must be positive");
    InitialDistribution d;
    d.kind_ = InitKind::density;
    d.x0_ = mean;
    d.sd_ = sd;
    d.cdf_ = [mean, sd](double x) { return normal_cdf((x - mean) / sd); };
    d.density_ = [mean, sd](double x) { return normal_pdf((x - mean) / sd) / sd; };
    d.lo_ = mean - 40.0 * sd;
    d.hi_ = mean + 40.0 * sd;
    return d;
}

InitialDistribution InitialDistribution::from_density(std::function<double(double)> rho, double lo,
                                                      double hi) {
    if (!(lo < hi)) throw std::invalid_argument("from_density: need lo < hi");
    InitialDistribution d;
    d.kind_ = InitKind::density;
    d.density_ = rho;
    d.lo_ = lo;
    d.hi_ = hi;
    // CDF by cumulative Simpson on a fixed fine grid.
    const int n = 4096;
    auto table = std::make_shared<std::vector<double>>(n + 1);
    double h = (hi - lo) / n;
    (*table)[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        double a = lo + (i - 1) * h, b = lo + i * h;
        (*table)[i] = (*table)[i - 1] + (h / 6.0) * (rho(a) + 4.0 * rho(0.5 * (a + b)) + rho(b));
    }
    double total = table->back();
    if (!(std::abs(total - 1.0) <= 1e-8)) {
        throw std::invalid_argument("from_density: density does not integrate to 1 within 1e-8");
    }
    for (auto& v : *table) v /= total;
    d.cdf_ = [table, lo, hi, h, n](double x) {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        double idx = (x - lo) / h;
        int i = static_cast<int>(idx);
        if (i >= n) return 1.0;
        double f = idx - i;
        return (*table)[i] * (1.0 - f) + (*table)[i + 1] * f;
    };
    d.x0_ = d.quantile(0.5);
    return d;
}

InitialDistribution InitialDistribution::from_cdf(std::function<double(double)> cdf, double lo,
                                                  double hi) {
    InitialDistribution d;
    d.kind_ = InitKind::cdf;
    d.cdf_ = std::move(cdf);
    d.lo_ = lo;
    d.hi_ = hi;
    d.x0_ = d.quantile(0.5);
    return d;
}

double InitialDistribution::cdf(double x) const { return cdf_(x); }

double InitialDistribution::density(double x) const {
    if (!density_) throw std::logic_error("initial law has no density");
    return density_(x);
}

double InitialDistribution::quantile(double u) const {
    if (kind_ == InitKind::point_mass) return x0_;
    if (sd_ > 0.0) return x0_ + sd_ * normal_quantile(u);
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u outside (0,1)");
    double a = lo_, b = hi_;
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        double m = 0.5 * (a + b);
        (cdf_(m) < u ? a : b) = m;
    }
    return 0.5 * (a + b);
}

double InitialDistribution::lower_support_edge(double eps) const {
    if (kind_ == InitKind::point_mass) return x0_;
    if (sd_ > 0.0) return kNegInf;  // full support
    return quantile(eps);
}

// ---------------------------------------------------------------------------
// TransitionDensity

TransitionDensity TransitionDensity::brownian() { return brownian_with_drift(0.0); }

TransitionDensity TransitionDensity::brownian_with_drift(double c) {
    TransitionDensity td;
    td.kind = c == 0.0 ? "bm" : "bm-drift";
    td.evaluator = [c](double y, double s, double x, double t) {
        if (!(t > s)) throw std::domain_error("transition density: requires s < t");
        double h = t - s;
        return normal_pdf((x - y - c * h) / std::sqrt(h)) / std::sqrt(h);
    };
    return td;
}

TransitionDensity TransitionDensity::pde_propagated(const DiffusionSpec& spec, double dx,
                                                    double dt) {
    TransitionDensity td;
    td.kind = "pde";
    DiffusionSpec sp = spec;
    td.evaluator = [sp, dx, dt](double y, double s, double x, double t) {
        if (!(t > s)) throw std::domain_error("transition density: requires s < t");
        // Local lattice around the starting point, wide enough for the horizon.
        double smax = 0.0;
        for (int i = 0; i <= 8; ++i) {
            smax = std::max(smax, sp.sigma(y + (i - 4.0), 0.5 * (s + t)));
        }
        double pad = 8.0 * smax * std::sqrt(t - s) + 2.0 * dx;
        auto lat = std::make_shared<Lattice>();
        lat->x_min = std::min(y, x) - pad;
        lat->x_max = std::max(y, x) + pad;
        lat->nx = std::max(17, static_cast<int>(std::ceil((lat->x_max - lat->x_min) / dx)) + 1);
        int steps = std::max(2, static_cast<int>(std::ceil((t - s) / dt)));
        lat->t.resize(steps + 1);
        for (int j = 0; j <= steps; ++j) lat->t[j] = s + (t - s) * j / steps;

        // Near-delta start: one cell of mass around y, then theta marching.
        std::vector<double> u(lat->nx, 0.0), unew(lat->nx, 0.0);
        double h = lat->dx();
        int k0 = static_cast<int>(std::floor((y - lat->x_min) / h));
        double frac = (y - lat->x(k0)) / h;
        u[k0] = (1.0 - frac) / h;
        u[k0 + 1] = frac / h;

        OperatorStencil s0, s1;
        for (int j = 1; j <= steps; ++j) {
            double ta = lat->t[j - 1], tb = lat->t[j];
            assemble_fokker_planck(sp, *lat, ta, s0);
            assemble_fokker_planck(sp, *lat, tb, s1);
            double th = (j <= 2) ? 1.0 : 0.5;  // damped start against the delta
            theta_step(s0, s1, tb - ta, th, u, unew, 0.0, 0.0);
            std::swap(u, unew);
        }
        int k = static_cast<int>(std::floor((x - lat->x_min) / h));
        double f = (x - lat->x(k)) / h;
        return u[k] * (1.0 - f) + u[k + 1] * f;
    };
    return td;
}

// ---------------------------------------------------------------------------
// UnitDiffusionTransform

UnitDiffusionTransform::UnitDiffusionTransform(DiffusionSpec spec, double quadrature_step)
    : spec_(std::move(spec)), h_(quadrature_step) {
    if (!(h_ > 0.0)) throw std::invalid_argument("unit transform: quadrature step must be positive");
}

double UnitDiffusionTransform::forward(double x, double t) const {
    // Composite Simpson of 1/sigma over [0, x] (signed).
    if (x == 0.0) return 0.0;
    double a = 0.0, b = x, sign = 1.0;
    if (x < 0.0) {
        a = x;
        b = 0.0;
        sign = -1.0;
    }
    int n = std::max(2, static_cast<int>(std::ceil((b - a) / h_)));
    if (n % 2) ++n;
    double h = (b - a) / n;
    double s = 1.0 / spec_.sigma(a, t) + 1.0 / spec_.sigma(b, t);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) / spec_.sigma(a + i * h, t);
    }
    return sign * s * h / 3.0;
}

double UnitDiffusionTransform::inverse(double y, double t) const {
    if (y == 0.0) return 0.0;
    // Expand a bracket, then bisect; Y(.,t) is strictly increasing.
    double lo = 0.0, hi = 0.0;
    double step = std::max(1.0, std::abs(y)) * spec_.vol_lower_bound;
    if (y > 0.0) {
        hi = step;
        while (forward(hi, t) < y) hi *= 2.0;
    } else {
        lo = -step;
        while (forward(lo, t) > y) lo *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (lo + hi);
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(m))) break;
        (forward(m, t) < y ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

double UnitDiffusionTransform::sigma_dt(double x, double t) const {
    double tp = t + h_, tm = std::max(0.0, t - h_);
    return (spec_.sigma(x, tp) - spec_.sigma(x, tm)) / (tp - tm);
}

double UnitDiffusionTransform::sigma_dx(double x, double t) const {
    return (spec_.sigma(x + h_, t) - spec_.sigma(x - h_, t)) / (2.0 * h_);
}

double UnitDiffusionTransform::transformed_drift(double y, double t) const {
    double x = inverse(y, t);
    // -int_0^x sigma_t/sigma^2 dz + mu/sigma - sigma_x/2, all at x = X(y,t).
    double integral = 0.0;
    if (x != 0.0) {
        double a = 0.0, b = x, sign = 1.0;
        if (x < 0.0) {
            a = x;
            b = 0.0;
            sign = -1.0;
        }
        int n = std::max(2, static_cast<int>(std::ceil((b - a) / h_)));
        if (n % 2) ++n;
        double h = (b - a) / n;
        auto f = [&](double z) {
            double s = spec_.sigma(z, t);
            return sigma_dt(z, t) / (s * s);
        };
        double s = f(a) + f(b);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
        integral = sign * s * h / 3.0;
    }
    return -integral + spec_.mu(x, t) / spec_.sigma(x, t) - 0.5 * sigma_dx(x, t);
}

DiffusionSpec UnitDiffusionTransform::transformed_spec() const {
    DiffusionSpec s;
    auto self = *this;
    s.drift = [self](double y, double t) { return self.transformed_drift(y, t); };
    s.vol = [](double, double) { return 1.0; };
    s.vol_lower_bound = 1.0;
    s.bound_m = spec_.bound_m;
    s.name = spec_.name + "-unit";
    return s;
}

UnitDiffusionTransform make_unit_transform(const DiffusionSpec& spec, double quadrature_step) {
    return UnitDiffusionTransform(spec, quadrature_step);
}

Boundary transform_boundary(const UnitDiffusionTransform& tr, const Boundary& b) {
    if (b.is_neg_inf_everywhere()) return Boundary::neg_infinity(b.horizon());
    auto tcopy = tr;
    auto bcopy = b;
    return Boundary::from_callable(
        [tcopy, bcopy](double t) {
            double v = bcopy.value(t);
            if (v == kNegInf) return kNegInf;
            return tcopy.forward(v, t);
        },
        b.horizon());
}

}  // namespace ifpp
