#pragma once

#include <utility>
#include <vector>

#include "ifpp/boundary.hpp"
#include "ifpp/grid.hpp"
#include "ifpp/survival.hpp"

namespace ifpp {

struct PsorOptions {
    double omega = 1.5;
    double tol = 1e-10;   // stop when the largest sweep update falls below this
    int max_sweeps = 10000;
};

struct InverseOptions {
    ThetaScheme scheme{};
    PsorOptions psor{};
    double eps_w_rel = 1e-8;    // level-set threshold, relative to p(t)
    double activity_tol = 1e-9; // obstacle counts as active when the unconstrained
                                // step overshoots p by more than this
    double isotonic_tol = 1e-9; // row monotonicity violations beyond this throw
    int t_min_rows = 10;        // boundary reported from this many rows in
    bool store_field = true;
    std::vector<double> output_times;  // rows to store; empty = every march time
};

struct ObstacleSolveReport {
    SurvivalField w;                      // stored rows
    Boundary b_hat;                       // knots at march times >= t_min
    std::vector<double> row_times;        // every march time
    std::vector<double> b_rows;           // extracted boundary per march time (-inf allowed)
    std::vector<char> row_active;         // whether the obstacle did work on that step
    double constraint_violation = 0.0;    // max (w - p)_+
    double complementarity_residual = 0.0;
    std::vector<double> complementarity_by_row;  // centered posthoc residual per interior row
    // same measurement excluding a fixed collar above the extracted boundary,
    // i.e. away from the free-boundary layer where the solution is only C^{1,1}
    std::vector<double> complementarity_interior_by_row;
    double interface_collar = 0.1;
    std::vector<int> psor_iterations;
    double decrease_rate_full = 0.0;      // L(p, 0, T)
    double largest_down_step = 0.0;       // max adjacent-row drop of the finite part
    double min_w = 0.0;
    double t_min = 0.0;
};

/// Obstacle solve of max{Lw, w-p} = 0: theta-scheme time march with the
/// constraint w <= p(t) enforced each step by projected SOR. Left Dirichlet
/// data p(t), right 0, initial row 1 - p0. The recovered boundary is the
/// eps-level set of p - w on rows where the obstacle actually did work;
/// rows where it stayed inactive report -inf.
ObstacleSolveReport solve_inverse(const DiffusionSpec& spec, const InitialDistribution& init,
                                  const SurvivalCurve& p, LatticePtr lat, double psor_tol,
                                  const InverseOptions& opts = {});

/// Pure level-set extraction from a stored field: per row the smallest x with
/// p(t) - w(x,t) > eps, linearly interpolated to the eps level; rows with no
/// such node give -inf. eps = eps_w_rel * p(t).
Boundary extract_boundary(const SurvivalField& w, const SurvivalCurve& p, double eps_w_rel = 1e-8);

struct ContinuityWindowReport {
    double t1 = 0.0, t2 = 0.0;
    double decrease_rate = 0.0;
    double max_down_jump = 0.0;   // over adjacent finite rows in the window
    double jump_bound = 0.0;      // c_fit * sqrt(dt |log dt|), largest over the window
    bool flagged = false;         // L > 0 and a down jump exceeded the modulus bound
    bool flat_interior_neg_inf = true;  // L == 0: boundary is -inf strictly inside
};

struct ContinuityReport {
    std::vector<ContinuityWindowReport> windows;
    bool ok = true;
};

/// Continuity diagnostic: where L(p,T1,T2) > 0 the recovered boundary must not
/// drop faster than the sqrt(t |log t|) modulus (with the fitted constant);
/// where p is flat the boundary must be -inf strictly inside the window.
ContinuityReport continuity_check(const SurvivalCurve& p, const ObstacleSolveReport& solved,
                                  std::span<const std::pair<double, double>> windows, double c_fit);

}  // namespace ifpp
