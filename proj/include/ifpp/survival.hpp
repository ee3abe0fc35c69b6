#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ifpp {

enum class CurveInterp { linear, log_linear };

/// A survival curve p(t): samples (t_j, p_j) with t_0 = 0, interpolated
/// monotonically. Curves carrying a closed form keep its tag (exponential
/// rate) so diagnostics can use exact values.
class SurvivalCurve {
  public:
    SurvivalCurve() = default;
    static SurvivalCurve from_samples(std::vector<double> t, std::vector<double> p,
                                      CurveInterp interp = CurveInterp::linear);

    double operator()(double t) const { return value(t); }
    double value(double t) const;

    double horizon() const { return t_.empty() ? 0.0 : t_.back(); }
    size_t size() const { return t_.size(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<double>& values() const { return p_; }
    CurveInterp interp() const { return interp_; }

    std::optional<double> exponential_rate;  // closed-form tag

    /// Restrict to [0, new_horizon] (inserting an interpolated sample at the cut).
    SurvivalCurve truncated(double new_horizon) const;

  private:
    std::vector<double> t_, p_;
    CurveInterp interp_ = CurveInterp::linear;
};

struct P0Report {
    bool valid = true;
    std::vector<std::string> violations;
    std::vector<size_t> indices;
};

/// Checks membership in the admissible curve class: p(0)=1 (tol 1e-12),
/// strictly positive samples, nonincreasing within 1e-12. Throws
/// std::invalid_argument on fewer than two samples.
P0Report validate_p0(const SurvivalCurve& p);

/// L(p,T1,T2) = inf over T1<=s<t<=T2 of (p(s)-p(t))/(t-s). For the linear
/// interpolant this is the minimum segment slope magnitude over the window;
/// for log-linear it is the essential infimum of -p'.
double decrease_rate(const SurvivalCurve& p, double t1, double t2);

}  // namespace ifpp
