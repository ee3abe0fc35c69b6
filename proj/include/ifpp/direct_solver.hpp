#pragma once

#include <optional>
#include <vector>

#include "ifpp/boundary.hpp"
#include "ifpp/grid.hpp"
#include "ifpp/survival.hpp"

namespace ifpp {

enum class KillWeighting {
    fractional,  // straddled cell keeps the sub-cell mass above the barrier
    whole_node   // nodes below (or at, for the strict rule) the barrier are zeroed
};

enum class CrossingRule { strict, nonstrict };  // chi_(b,inf) vs chi_[b,inf)

struct DirectOptions {
    // Pure Crank-Nicolson: the finite-volume projection keeps the density
    // nonnegative here, and a level-independent scheme is what makes the
    // refinement ladder extrapolate cleanly.
    ThetaScheme scheme{0.5, 0};
    KillWeighting weighting = KillWeighting::fractional;
    CrossingRule rule = CrossingRule::strict;
    double negative_density_tol = 1e-12;  // beyond this the scheme is declared unstable
    bool store_fields = true;
    bool with_companion = false;          // also march the unkilled density
    std::vector<double> output_times;     // rows to store; empty = every march time
};

struct DirectStats {
    double min_density = 0.0;              // most negative node value seen (post-clamp check)
    double max_mass_increase = 0.0;        // largest step-to-step increase of the total mass
    double max_postkill_flat_gap = 0.0;    // |w(x_min) - w(x)| below the cut right after kills
    int kills = 0;
    int rannacher_steps = 0;
};

struct DirectResult {
    SurvivalCurve p;           // marginal survival at every march time (sample at 0 prepended)
    DensityField density;      // stored rows of U
    SurvivalField survival;    // stored rows of w (suffix integral of U)
    std::optional<DensityField> companion;  // unkilled density, same rows
    DirectStats stats;
};

/// Landmark killing scheme: marches the forward equation between consecutive
/// landmark times and restricts the density to (b*(t), inf) at each one.
/// Output values at a landmark time are the pre-kill marginals. The lattice
/// must contain every landmark time of the requested level.
DirectResult solve_direct_landmark(const DiffusionSpec& spec, const InitialDistribution& init,
                                   const Boundary& b, int level, LatticePtr lat,
                                   const DirectOptions& opts = {});

struct RefineOptions {
    DirectOptions direct{};
    double monotonicity_tol = 1e-12;  // violations beyond this throw
    int extrapolation_points = 5;     // levels entering the limit fit
};

struct RefineResult {
    std::vector<int> levels;
    std::vector<SurvivalCurve> curves;
    SurvivalCurve extrapolated;
    double max_monotonicity_violation = 0.0;
};

/// Runs the landmark solver for levels n0..n_max on one shared lattice,
/// verifies the monotone chain p_n >= p_{n+1}, and Richardson-extrapolates the
/// level limit in powers of 2^{-n/2} (the discrete-monitoring bias scale).
RefineResult refine_direct(const DiffusionSpec& spec, const InitialDistribution& init,
                           const Boundary& b, int n0, int n_max, LatticePtr lat,
                           const RefineOptions& opts = {});

struct FluxResidualPoint {
    double t = 0.0;
    double residual = 0.0;
    bool reliable = true;  // false when the barrier sits at the lattice edge
};

/// Free-boundary flux diagnostic: r(t) = p'(t) + 1/2 d/dx(sigma^2 U) at b(t)+,
/// with one-sided second-order differences in x and centered differences in t.
/// `clearance` shifts the differentiation stencil above the barrier so it sits
/// past the landmark regrowth layer (width ~ sqrt(2^{-n}); the layer carries
/// the mass that diffused below the barrier since the previous kill).
std::vector<FluxResidualPoint> flux_residual(const SurvivalCurve& p, const DensityField& u,
                                             const Boundary& b, const DiffusionSpec& spec,
                                             double clearance = 0.0);

}  // namespace ifpp
