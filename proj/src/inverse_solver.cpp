#include "ifpp/inverse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ifpp/math_util.hpp"

namespace ifpp {

namespace {

/// Smallest x with p - w > eps, interpolated to the eps level set; -inf when
/// no node qualifies. Node 0 carries the Dirichlet value w = p and never fires.
double level_set_cross(std::span<const double> w, const Lattice& lat, double psi, double eps) {
    const int n = lat.nx;
    const double dx = lat.dx();
    for (int k = 1; k < n; ++k) {
        double g = psi - w[k];
        if (g > eps) {
            double gprev = psi - w[k - 1];
            double f = (eps - gprev) / (g - gprev);
            return lat.x(k - 1) + f * dx;
        }
    }
    return kNegInf;
}

struct PsorWork {
    std::vector<double> lo, di, up, rhs;
};

}  // namespace

ObstacleSolveReport solve_inverse(const DiffusionSpec& spec, const InitialDistribution& init,
                                  const SurvivalCurve& p, LatticePtr lat, double psor_tol,
                                  const InverseOptions& opts) {
    auto p0rep = validate_p0(p);
    if (!p0rep.valid) {
        std::string msg = "solve_inverse: survival curve fails admissibility:";
        for (const auto& v : p0rep.violations) msg += " " + v + ";";
        throw std::invalid_argument(msg);
    }
    lat->validate();
    const int n = lat->nx;
    const auto& tg = lat->t;
    const double tol = psor_tol > 0.0 ? psor_tol : opts.psor.tol;

    ObstacleSolveReport rep;
    rep.row_times = tg;
    rep.b_rows.assign(tg.size(), kNegInf);
    rep.row_active.assign(tg.size(), 0);
    rep.psor_iterations.assign(tg.size(), 0);
    rep.complementarity_by_row.assign(tg.size(), 0.0);
    rep.complementarity_interior_by_row.assign(tg.size(), 0.0);

    // initial row: w = 1 - p0(., t0), capped by the obstacle
    std::vector<double> w(n, 0.0);
    const double t0 = tg.front();
    if (init.is_point_mass()) {
        double m = init.point() + spec.mu(init.point(), 0.0) * t0;
        double sd = spec.sigma(init.point(), 0.0) * std::sqrt(std::max(t0, 1e-300));
        for (int k = 0; k < n; ++k) {
            w[k] = t0 > 0.0 ? 1.0 - normal_cdf((lat->x(k) - m) / sd)
                            : (lat->x(k) < init.point() ? 1.0 : 0.0);
        }
    } else {
        for (int k = 0; k < n; ++k) w[k] = 1.0 - init.cdf(lat->x(k));
    }
    double psi0 = p.value(t0);
    for (auto& v : w) v = std::min(v, psi0);
    w[0] = psi0;
    w[n - 1] = 0.0;

    // stored rows
    std::vector<double> store_times;
    std::vector<size_t> row_of(tg.size(), static_cast<size_t>(-1));
    {
        std::vector<char> keep(tg.size(), 0);
        if (opts.output_times.empty()) {
            std::fill(keep.begin(), keep.end(), 1);
        } else {
            for (double t : opts.output_times) {
                int j = lat->find_time(t);
                if (j >= 0) keep[j] = 1;
            }
            keep[0] = 1;
            keep[tg.size() - 1] = 1;
        }
        for (size_t j = 0; j < tg.size(); ++j) {
            if (keep[j]) {
                row_of[j] = store_times.size();
                store_times.push_back(tg[j]);
            }
        }
    }
    if (opts.store_field) rep.w = SurvivalField(lat, store_times);
    auto record = [&](size_t j, const std::vector<double>& row) {
        if (!opts.store_field) return;
        size_t r = row_of[j];
        if (r != static_cast<size_t>(-1)) {
            std::copy(row.begin(), row.end(), rep.w.row(r).begin());
        }
    };
    record(0, w);
    rep.b_rows[0] = level_set_cross(w, *lat, psi0, opts.eps_w_rel * psi0);
    rep.row_active[0] = 1;

    OperatorStencil s0, s1;
    PsorWork wk;
    wk.lo.assign(n, 0.0);
    wk.di.assign(n, 1.0);
    wk.up.assign(n, 0.0);
    wk.rhs.assign(n, 0.0);
    std::vector<double> wprev2, wprev1 = w;
    double tprev2 = 0.0, tprev1 = t0;
    int rannacher_pending = (opts.scheme.rannacher_half_steps > 0) ? 1 : 0;

    // One obstacle-projected theta step; returns (sweeps, overshoot).
    auto obstacle_step = [&](std::vector<double>& x, double ta, double tb, double theta,
                             double psi) -> std::pair<int, double> {
        const double dt = tb - ta;
        assemble_divergence_form(spec, *lat, ta, s0);
        assemble_divergence_form(spec, *lat, tb, s1);
        const double ex = (1.0 - theta) * dt;
        for (int k = 1; k + 1 < n; ++k) {
            wk.rhs[k] = x[k] - ex * (s0.lower[k] * x[k - 1] + s0.diag[k] * x[k] +
                                     s0.upper[k] * x[k + 1]);
            wk.lo[k] = theta * dt * s1.lower[k];
            wk.di[k] = 1.0 + theta * dt * s1.diag[k];
            wk.up[k] = theta * dt * s1.upper[k];
        }
        x[0] = p.value(tb);
        x[n - 1] = 0.0;
        int sweeps = 0;
        double omega = opts.psor.omega;
        for (; sweeps < opts.psor.max_sweeps; ++sweeps) {
            double max_update = 0.0;
            for (int k = 1; k + 1 < n; ++k) {
                double gs = (wk.rhs[k] - wk.lo[k] * x[k - 1] - wk.up[k] * x[k + 1]) / wk.di[k];
                double xn = x[k] + omega * (gs - x[k]);
                if (xn > psi) xn = psi;
                max_update = std::max(max_update, std::abs(xn - x[k]));
                x[k] = xn;
            }
            if (max_update < tol) {
                ++sweeps;
                break;
            }
        }
        if (sweeps >= opts.psor.max_sweeps) {
            throw std::runtime_error("solve_inverse: PSOR failed to converge at t=" +
                                     std::to_string(tb));
        }
        // where the constraint binds, measure how hard the unconstrained step pushes
        double overshoot = 0.0;
        for (int k = 1; k + 1 < n; ++k) {
            if (x[k] >= psi) {
                double gs = (wk.rhs[k] - wk.lo[k] * x[k - 1] - wk.up[k] * x[k + 1]) / wk.di[k];
                overshoot = std::max(overshoot, gs - psi);
            }
        }
        return {sweeps, overshoot};
    };

    for (size_t j = 1; j < tg.size(); ++j) {
        const double ta = tg[j - 1], tb = tg[j];
        const double psi = p.value(tb);
        int sweeps = 0;
        double overshoot = 0.0;
        if (rannacher_pending > 0) {
            double tm = ta + 0.5 * (tb - ta);
            auto [s_a, o_a] = obstacle_step(w, ta, tm, 1.0, p.value(tm));
            auto [s_b, o_b] = obstacle_step(w, tm, tb, 1.0, psi);
            sweeps = s_a + s_b;
            overshoot = std::max(o_a, o_b);
            --rannacher_pending;
        } else {
            auto [s_a, o_a] = obstacle_step(w, ta, tb, opts.scheme.theta, psi);
            sweeps = s_a;
            overshoot = o_a;
        }
        rep.psor_iterations[j] = sweeps;
        rep.row_active[j] = overshoot > opts.activity_tol ? 1 : 0;

        // row hygiene: w in [0, psi], nonincreasing in x
        double viol = 0.0;
        for (int k = 1; k + 1 < n; ++k) {
            rep.constraint_violation = std::max(rep.constraint_violation, w[k] - psi);
            rep.min_w = std::min(rep.min_w, w[k]);
            if (w[k] > w[k - 1]) {
                viol = std::max(viol, w[k] - w[k - 1]);
            }
        }
        if (viol > opts.isotonic_tol) {
            throw std::runtime_error("solve_inverse: row monotonicity violated by " +
                                     std::to_string(viol) + " at t=" + std::to_string(tb));
        }
        for (int k = 1; k < n; ++k) w[k] = std::min(w[k], w[k - 1]);

        rep.b_rows[j] = rep.row_active[j]
                            ? level_set_cross(w, *lat, psi, opts.eps_w_rel * psi)
                            : kNegInf;
        record(j, w);

        // centered posthoc residual at the previous row
        if (j >= 2) {
            double dtm = tprev1 - tprev2, dtp = tb - tprev1;
            assemble_divergence_form(spec, *lat, tprev1, s0);
            double psi_prev = p.value(tprev1);
            double bprev = rep.b_rows[j - 1];
            double rmax = 0.0, rmax_int = 0.0;
            for (int k = 1; k + 1 < n; ++k) {
                double wt = (dtm * dtm * w[k] - dtp * dtp * wprev2[k] +
                             (dtp * dtp - dtm * dtm) * wprev1[k]) /
                            (dtm * dtp * (dtm + dtp));
                double lw = wt + s0.lower[k] * wprev1[k - 1] + s0.diag[k] * wprev1[k] +
                            s0.upper[k] * wprev1[k + 1];
                double gap = psi_prev - wprev1[k];
                double m = std::min(std::abs(lw), gap);
                rmax = std::max(rmax, m);
                bool in_layer = bprev != kNegInf && lat->x(k) > bprev - rep.interface_collar &&
                                lat->x(k) < bprev + rep.interface_collar;
                if (!in_layer) rmax_int = std::max(rmax_int, m);
            }
            rep.complementarity_by_row[j - 1] = rmax;
            rep.complementarity_interior_by_row[j - 1] = rmax_int;
        }
        wprev2 = wprev1;
        wprev1 = w;
        tprev2 = tprev1;
        tprev1 = tb;
    }

    // boundary knots from t_min on
    size_t jmin = std::min<size_t>(static_cast<size_t>(std::max(opts.t_min_rows, 0)), tg.size() - 2);
    rep.t_min = tg[jmin];
    std::vector<double> bt(tg.begin() + jmin, tg.end());
    std::vector<double> bv(rep.b_rows.begin() + jmin, rep.b_rows.end());
    rep.b_hat = Boundary::piecewise_linear(std::move(bt), std::move(bv), tg.back());

    for (size_t j = jmin; j + 1 < tg.size(); ++j) {
        if (rep.b_rows[j] != kNegInf && rep.b_rows[j + 1] != kNegInf) {
            rep.largest_down_step =
                std::max(rep.largest_down_step, rep.b_rows[j] - rep.b_rows[j + 1]);
        }
    }
    for (double r : rep.complementarity_by_row) {
        rep.complementarity_residual = std::max(rep.complementarity_residual, r);
    }
    rep.decrease_rate_full = decrease_rate(p, 0.0, std::min(p.horizon(), tg.back()));
    return rep;
}

Boundary extract_boundary(const SurvivalField& w, const SurvivalCurve& p, double eps_w_rel) {
    if (w.rows() == 0) throw std::invalid_argument("extract_boundary: empty field");
    std::vector<double> bt, bv;
    for (size_t j = 0; j < w.rows(); ++j) {
        double t = w.row_time(j);
        double psi = p.value(t);
        auto row = w.row(j);
        for (size_t k = 1; k < row.size(); ++k) {
            if (row[k] > row[k - 1] + 1e-12) {
                throw std::runtime_error("extract_boundary: non-monotone row at t=" +
                                         std::to_string(t));
            }
        }
        if (t <= 0.0) continue;
        bt.push_back(t);
        bv.push_back(level_set_cross(row, w.lattice(), psi, eps_w_rel * psi));
    }
    double horizon = w.row_time(w.rows() - 1);
    return Boundary::piecewise_linear(std::move(bt), std::move(bv), horizon);
}

ContinuityReport continuity_check(const SurvivalCurve& p, const ObstacleSolveReport& solved,
                                  std::span<const std::pair<double, double>> windows,
                                  double c_fit) {
    ContinuityReport out;
    for (auto [t1, t2] : windows) {
        ContinuityWindowReport wr;
        wr.t1 = t1;
        wr.t2 = t2;
        wr.decrease_rate = decrease_rate(p, t1, std::min(t2, p.horizon()));
        const auto& ts = solved.row_times;
        const auto& bs = solved.b_rows;
        if (wr.decrease_rate > 1e-12) {
            for (size_t j = 0; j + 1 < ts.size(); ++j) {
                if (ts[j] < std::max(t1, solved.t_min) || ts[j + 1] > t2) continue;
                if (bs[j] == kNegInf || bs[j + 1] == kNegInf) continue;
                double jump = bs[j] - bs[j + 1];
                double dt = ts[j + 1] - ts[j];
                double bound = c_fit * std::sqrt(dt * std::abs(std::log(dt)));
                wr.max_down_jump = std::max(wr.max_down_jump, jump);
                wr.jump_bound = std::max(wr.jump_bound, bound);
                if (jump > bound) wr.flagged = true;
            }
            if (wr.flagged) out.ok = false;
        } else {
            for (size_t j = 0; j < ts.size(); ++j) {
                if (ts[j] > t1 && ts[j] < t2 && bs[j] != kNegInf) {
                    wr.flat_interior_neg_inf = false;
                }
            }
            if (!wr.flat_interior_neg_inf) out.ok = false;
        }
        out.windows.push_back(wr);
    }
    return out;
}

}  // namespace ifpp
