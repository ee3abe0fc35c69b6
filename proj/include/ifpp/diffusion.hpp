#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "ifpp/math_util.hpp"

namespace ifpp {

class Boundary;

using CoefficientFn = std::function<double(double x, double t)>;

/// SDE coefficients dX = mu dt + sigma dB plus the regularity metadata the
/// diagnostics use. Coefficient functions must be pure; all evaluation goes
/// through the checked accessors.
struct DiffusionSpec {
    CoefficientFn drift;
    CoefficientFn vol;
    double vol_lower_bound = 0.0;  // inf sigma, must be > 0
    double bound_m = 0.0;          // sup |mu| + |mu_x|, diagnostics only
    std::string name = "custom";

    double mu(double x, double t) const;
    double sigma(double x, double t) const;

    static DiffusionSpec brownian();
    static DiffusionSpec brownian_with_drift(double c);
};

enum class InitKind { point_mass, density, cdf };

/// Initial law of X_0: point mass, density, or CDF. Provides the CDF,
/// quantiles (used for lattice truncation and MC sampling), and the
/// regularized density the PDE schemes start from.
class InitialDistribution {
  public:
    static InitialDistribution point_mass(double x0);
    static InitialDistribution gaussian(double mean, double sd);
    static InitialDistribution from_density(std::function<double(double)> rho, double lo, double hi);
    static InitialDistribution from_cdf(std::function<double(double)> cdf, double lo, double hi);

    InitKind kind() const { return kind_; }
    bool is_point_mass() const { return kind_ == InitKind::point_mass; }
    double point() const { return x0_; }

    double cdf(double x) const;
    bool has_density() const { return static_cast<bool>(density_); }
    double density(double x) const;

    /// Inverse-CDF sample; u in (0,1).
    double quantile(double u) const;

    /// Essential lower edge of the support (quantile at eps; exact for point mass).
    double lower_support_edge(double eps = 1e-12) const;

  private:
    InitKind kind_ = InitKind::point_mass;
    double x0_ = 0.0;
    double sd_ = 0.0;  // gaussian case
    std::function<double(double)> cdf_;
    std::function<double(double)> density_;
    double lo_ = 0.0, hi_ = 0.0;  // bracket for generic quantile bisection
};

/// Transition density rho(y,s; x,t). Closed forms exist for Brownian motion
/// with and without constant drift; the general case is served by one-step
/// PDE propagation and carries no closed form.
struct TransitionDensity {
    std::function<double(double y, double s, double x, double t)> evaluator;
    std::string kind = "custom";

    double operator()(double y, double s, double x, double t) const { return evaluator(y, s, x, t); }

    static TransitionDensity brownian();
    static TransitionDensity brownian_with_drift(double c);
    /// Numeric evaluator marching the forward equation from a near-delta start.
    static TransitionDensity pde_propagated(const DiffusionSpec& spec, double dx, double dt);
};

/// Change of variables y = Y(x,t) = int_0^x dz/sigma(z,t) reducing a general
/// diffusion to unit volatility. Forward map by composite Simpson quadrature,
/// inverse by monotone bisection, transformed drift from the three-term
/// formula with sigma derivatives taken by central differences.
class UnitDiffusionTransform {
  public:
    UnitDiffusionTransform(DiffusionSpec spec, double quadrature_step);

    double forward(double x, double t) const;   // Y(x,t)
    double inverse(double y, double t) const;   // X(y,t), bisection to 1e-12
    double transformed_drift(double y, double t) const;

    const DiffusionSpec& original() const { return spec_; }
    /// Unit-vol spec driven by the transformed drift (for simulating Y directly).
    DiffusionSpec transformed_spec() const;

  private:
    double sigma_dt(double x, double t) const;
    double sigma_dx(double x, double t) const;

    DiffusionSpec spec_;
    double h_;
};

UnitDiffusionTransform make_unit_transform(const DiffusionSpec& spec, double quadrature_step = 1e-3);

/// Maps a boundary through the transform: t -> Y(b(t), t); -inf is preserved.
Boundary transform_boundary(const UnitDiffusionTransform& tr, const Boundary& b);

}  // namespace ifpp
