#pragma once

#include "ifpp/survival.hpp"

namespace ifpp {

/// Reflection-principle survival of Brownian motion from x0 against a constant
/// barrier: erf((x0 - barrier)/sqrt(2t)). Requires x0 > barrier, t >= 0.
double bm_constant_barrier_survival(double x0, double barrier, double t);

/// Bachelier-Levy survival against the linear barrier a + c t:
/// Phi((x0-a-ct)/sqrt(t)) - exp(-2c(x0-a)) Phi((a-x0-ct)/sqrt(t)).
double bm_linear_barrier_survival(double x0, double a, double c, double t);

/// Exponential survival curve p(t) = exp(-lambda t), tagged with its rate.
SurvivalCurve exponential_curve(double lambda, double horizon, int samples);

}  // namespace ifpp
