#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ifpp/diffusion.hpp"
#include "ifpp/math_util.hpp"

namespace ifpp {

enum class BoundaryInterp { constant, piecewise_linear, piecewise_constant, callable };

/// A barrier b: (0,T] -> [-inf, inf). Knot-based representations are exact;
/// callables are evaluated as black boxes and resampled where exactness is
/// required. Values of -inf are first class: a piecewise-linear segment with a
/// -inf endpoint is -inf on its open interior, and piecewise-constant plateaus
/// may be -inf outright. Before the first knot and after the last the nearest
/// knot value is carried constantly.
class Boundary {
  public:
    Boundary() = default;  // placeholder; evaluation throws until assigned

    static Boundary constant(double level, double horizon);
    static Boundary neg_infinity(double horizon);
    static Boundary piecewise_linear(std::vector<double> t, std::vector<double> v, double horizon);
    static Boundary piecewise_constant(std::vector<double> t, std::vector<double> v, double horizon);
    static Boundary from_callable(std::function<double(double)> f, double horizon);

    double horizon() const { return horizon_; }
    BoundaryInterp interp() const { return interp_; }

    /// b(t) for t in (0, horizon]; throws std::domain_error outside.
    double value(double t) const;
    double operator()(double t) const { return value(t); }

    bool is_neg_inf_everywhere() const;
    /// Infimum of the finite part over (0,T]; +inf when the boundary is -inf everywhere.
    double finite_infimum() const;
    /// Supremum of the finite part (used for B0 reporting); -inf when all -inf.
    double finite_supremum() const;

    const std::vector<double>& knot_times() const { return t_; }
    const std::vector<double>& knot_values() const { return v_; }

    /// Exact supremum of b over [a,c] intersected with (0,T] (piecewise reps only).
    double supremum(double a, double c) const;

    /// Resample a callable boundary onto a dyadic grid of the given level and
    /// treat it as piecewise-linear. Identity for knot-based representations.
    Boundary resampled_dyadic(int level) const;

  private:
    friend double usc_envelope(const Boundary&, double);
    friend double left_limsup(const Boundary&, double);
    friend double usc_envelope_at_zero(const Boundary&);

    // value limits from inside the adjacent open segments
    double left_limit(double t) const;
    double right_limit(double t) const;
    double eval_pwl(double t) const;
    double eval_pwc(double t) const;

    BoundaryInterp interp_ = BoundaryInterp::constant;
    double const_value_ = kNegInf;
    std::vector<double> t_, v_;
    std::function<double(double)> fn_;
    double horizon_ = 0.0;
};

/// b*(t) = max{ b(t), limsup_{s->t} b(s) }. Exact for knot-based
/// representations; sampled approximation for callables.
double usc_envelope(const Boundary& b, double t);

/// b*_-(t) = limsup_{s^t} b(s) (left limsup).
double left_limsup(const Boundary& b, double t);

/// b*(0) = limsup_{s v 0} b(s).
double usc_envelope_at_zero(const Boundary& b);

/// Landmark points of one dyadic level: per cell [i 2^-n, (i+1) 2^-n], the
/// first time the usc envelope attains the cell supremum of b. Nested across
/// levels (each point of level n reappears at level n+1).
struct LandmarkSet {
    int level = 0;
    double width = 1.0;  // 2^-level
    struct Point {
        int64_t cell;
        double time;
        double envelope;  // b* at the landmark = kill level
    };
    std::vector<Point> points;
};

LandmarkSet landmarks(const Boundary& b, int level);

/// Report of the sampled / Monte Carlo proxy for membership in the admissible
/// boundary class (usc, left-regular, starts below the initial law a.s.).
/// The verdict is "consistent with" the class, never a proof.
struct B0Report {
    bool usc_equal = true;       // b == b* at all checked points
    bool left_regular = true;    // b == b*_- at all checked points
    bool start_above = true;     // b*(0) <= lower support edge of X_0
    double envelope_at_zero = kNegInf;
    double support_edge = kNegInf;
    // (epsilon, estimated crossing mass on (0, epsilon])
    std::vector<std::pair<double, double>> early_crossing_mass;
    bool consistent = true;
    std::vector<std::string> notes;
};

B0Report check_b0(const Boundary& b, const DiffusionSpec& spec, const InitialDistribution& init,
                  uint64_t seed = 7041826u);

}  // namespace ifpp
