#include "ifpp/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "ifpp/math_util.hpp"

namespace ifpp {

double bm_constant_barrier_survival(double x0, double barrier, double t) {
    if (!(x0 > barrier)) {
        throw std::domain_error("bm_constant_barrier_survival: requires x0 > barrier");
    }
    if (t < 0.0) throw std::domain_error("bm_constant_barrier_survival: t < 0");
    if (t == 0.0) return 1.0;
    return std::erf((x0 - barrier) / std::sqrt(2.0 * t));
}

double bm_linear_barrier_survival(double x0, double a, double c, double t) {
    if (!(x0 > a)) {
        throw std::domain_error("bm_linear_barrier_survival: requires x0 > a");
    }
    if (t < 0.0) throw std::domain_error("bm_linear_barrier_survival: t < 0");
    if (t == 0.0) return 1.0;
    double rt = std::sqrt(t);
    double d = x0 - a;
    return normal_cdf((d - c * t) / rt) - std::exp(2.0 * c * d) * normal_cdf((-d - c * t) / rt);
}

SurvivalCurve exponential_curve(double lambda, double horizon, int samples) {
    if (!(lambda > 0.0)) throw std::domain_error("exponential_curve: lambda must be positive");
    if (samples < 2) throw std::invalid_argument("exponential_curve: need at least 2 samples");
    std::vector<double> t(samples), p(samples);
    for (int j = 0; j < samples; ++j) {
        t[j] = horizon * j / (samples - 1);
        p[j] = std::exp(-lambda * t[j]);
    }
    auto curve = SurvivalCurve::from_samples(std::move(t), std::move(p));
    curve.exponential_rate = lambda;
    return curve;
}

}  // namespace ifpp
