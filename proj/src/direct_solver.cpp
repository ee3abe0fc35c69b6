#include "ifpp/direct_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ifpp/math_util.hpp"

namespace ifpp {

namespace {

/// Finite-volume restriction to (beta, inf): each node owns the cell
/// [x-dx/2, x+dx/2] and keeps the fraction of its mass above the barrier.
/// The strict/non-strict rules differ only on the measure-zero event of a
/// node sitting exactly at the barrier, realized only by whole-node killing.
void apply_kill(std::span<double> u, const Lattice& lat, double beta, KillWeighting w,
                CrossingRule rule) {
    if (beta == kNegInf) return;
    const double dx = lat.dx();
    const int n = lat.nx;
    if (beta >= lat.x_max + 0.5 * dx) {
        std::fill(u.begin(), u.end(), 0.0);
        return;
    }
    if (w == KillWeighting::whole_node) {
        for (int k = 0; k < n; ++k) {
            double x = lat.x(k);
            if (x < beta || (rule == CrossingRule::strict && x == beta)) {
                u[k] = 0.0;
            } else {
                break;
            }
        }
        return;
    }
    const double r = (beta - lat.x_min) / dx;  // barrier position in node units
    int lo = std::max(0, static_cast<int>(std::floor(r - 0.5)));
    for (int k = 0; k < lo; ++k) u[k] = 0.0;
    int hi = std::min(n - 1, static_cast<int>(std::ceil(r + 0.5)));
    for (int k = lo; k <= hi; ++k) {
        double f = std::clamp(k + 0.5 - r, 0.0, 1.0);
        u[k] *= f;
    }
}

struct CellAverager {
    // cell averages of the initial density over [x-dx/2, x+dx/2]
    static std::vector<double> initial_row(const DiffusionSpec& spec,
                                           const InitialDistribution& init, const Lattice& lat,
                                           double t0) {
        const int n = lat.nx;
        const double dx = lat.dx();
        std::vector<double> u(n, 0.0);
        if (init.is_point_mass()) {
            // warm-start kernel: first-order transition density from the point mass
            double x0 = init.point();
            double m = x0 + spec.mu(x0, 0.0) * t0;
            double sd = spec.sigma(x0, 0.0) * std::sqrt(t0);
            for (int k = 0; k < n; ++k) {
                double a = (lat.x(k) - 0.5 * dx - m) / sd;
                double b = (lat.x(k) + 0.5 * dx - m) / sd;
                u[k] = (normal_cdf(b) - normal_cdf(a)) / dx;
            }
        } else if (init.has_density()) {
            for (int k = 0; k < n; ++k) {
                double a = lat.x(k) - 0.5 * dx, b = lat.x(k) + 0.5 * dx;
                u[k] = (init.density(a) + 4.0 * init.density(0.5 * (a + b)) + init.density(b)) / 6.0;
            }
        } else {
            for (int k = 0; k < n; ++k) {
                double a = lat.x(k) - 0.5 * dx, b = lat.x(k) + 0.5 * dx;
                u[k] = (init.cdf(b) - init.cdf(a)) / dx;
            }
        }
        return u;
    }
};

struct RowPlan {
    std::vector<char> store;       // per march index
    std::vector<double> times;     // stored times
    std::vector<size_t> row_of;    // march index -> stored row (or npos)
};

RowPlan plan_rows(const Lattice& lat, const std::vector<double>& output_times) {
    RowPlan plan;
    plan.store.assign(lat.nt(), 0);
    plan.row_of.assign(lat.nt(), static_cast<size_t>(-1));
    if (output_times.empty()) {
        for (size_t j = 0; j < lat.nt(); ++j) plan.store[j] = 1;
    } else {
        for (double t : output_times) {
            int j = lat.find_time(t);
            if (j >= 0) plan.store[j] = 1;
        }
        plan.store[0] = 1;
        plan.store[lat.nt() - 1] = 1;
    }
    for (size_t j = 0; j < lat.nt(); ++j) {
        if (plan.store[j]) {
            plan.row_of[j] = plan.times.size();
            plan.times.push_back(lat.t[j]);
        }
    }
    return plan;
}

}  // namespace

DirectResult solve_direct_landmark(const DiffusionSpec& spec, const InitialDistribution& init,
                                   const Boundary& b, int level, LatticePtr lat,
                                   const DirectOptions& opts) {
    lat->validate();
    const int n = lat->nx;
    const double dx = lat->dx();
    const auto& tg = lat->t;

    // Kill schedule: landmark time -> cut level; times at or before the start
    // restrict the initial data.
    auto lm = landmarks(b, level);
    std::map<size_t, double> kills;
    std::vector<std::pair<double, double>> initial_kills;
    for (const auto& pt : lm.points) {
        if (pt.envelope == kNegInf) continue;  // nothing below the grid to remove
        if (pt.time < tg.front() - 1e-12 * std::max(1.0, tg.front())) {
            initial_kills.emplace_back(pt.time, pt.envelope);
            continue;
        }
        int j = lat->find_time(pt.time);
        if (j < 0) {
            throw std::invalid_argument("direct solve: landmark time " + std::to_string(pt.time) +
                                        " is not on the lattice");
        }
        auto [it, inserted] = kills.emplace(static_cast<size_t>(j), pt.envelope);
        if (!inserted) it->second = std::max(it->second, pt.envelope);
    }
    std::sort(initial_kills.begin(), initial_kills.end());

    RowPlan plan = plan_rows(*lat, opts.store_fields ? opts.output_times
                                                     : std::vector<double>{tg.front(), tg.back()});
    DirectResult res;
    if (opts.store_fields) {
        res.density = DensityField(lat, plan.times);
        res.survival = SurvivalField(lat, plan.times);
        if (opts.with_companion) res.companion = DensityField(lat, plan.times);
    }

    std::vector<double> u = CellAverager::initial_row(spec, init, *lat, tg.front());
    std::vector<double> unew(n, 0.0);
    std::vector<double> comp, compnew;
    if (opts.with_companion) {
        comp = u;
        compnew.assign(n, 0.0);
    }

    std::vector<double> pcurve(tg.size(), 0.0);
    std::vector<double> wrow(n, 0.0);

    auto record = [&](size_t j, const std::vector<double>& urow) {
        if (!opts.store_fields) return;
        size_t r = plan.row_of[j];
        if (r == static_cast<size_t>(-1)) return;
        std::copy(urow.begin(), urow.end(), res.density.row(r).begin());
        suffix_trapezoid(urow, dx, res.survival.row(r));
        if (opts.with_companion) {
            std::copy(comp.begin(), comp.end(), res.companion->row(r).begin());
        }
    };

    DirectStats& stats = res.stats;
    for (const auto& [t, beta] : initial_kills) {
        apply_kill(u, *lat, beta, opts.weighting, opts.rule);
        ++stats.kills;
    }
    pcurve[0] = trapezoid(u, dx);
    double prev_mass = pcurve[0];
    record(0, u);
    if (auto it = kills.find(0); it != kills.end()) {
        apply_kill(u, *lat, it->second, opts.weighting, opts.rule);
        ++stats.kills;
        prev_mass = trapezoid(u, dx);
    }

    OperatorStencil s0, s1, smid;
    int rannacher_pending = (opts.scheme.rannacher_half_steps > 0) ? 1 : 0;  // damp the start

    for (size_t j = 1; j < tg.size(); ++j) {
        const double ta = tg[j - 1], tb = tg[j];
        const double dt = tb - ta;
        auto advance = [&](std::vector<double>& cur, std::vector<double>& next) {
            if (rannacher_pending > 0) {
                double tm = ta + 0.5 * dt;
                assemble_fokker_planck(spec, *lat, ta, s0);
                assemble_fokker_planck(spec, *lat, tm, smid);
                theta_step(s0, smid, 0.5 * dt, 1.0, cur, next, 0.0, 0.0);
                assemble_fokker_planck(spec, *lat, tb, s1);
                theta_step(smid, s1, 0.5 * dt, 1.0, next, cur, 0.0, 0.0);
                std::swap(cur, next);  // result ends in cur after swap below
            } else {
                assemble_fokker_planck(spec, *lat, ta, s0);
                assemble_fokker_planck(spec, *lat, tb, s1);
                theta_step(s0, s1, dt, opts.scheme.theta, cur, next, 0.0, 0.0);
            }
            std::swap(cur, next);
        };
        advance(u, unew);
        if (opts.with_companion) advance(comp, compnew);
        if (rannacher_pending > 0) {
            --rannacher_pending;
            ++stats.rannacher_steps;
        }

        // negativity audit: genuine instability throws, roundoff dust is floored
        double mn = 0.0;
        for (double v : u) mn = std::min(mn, v);
        stats.min_density = std::min(stats.min_density, mn);
        if (mn < -opts.negative_density_tol) {
            throw std::runtime_error("direct solve: density undershoot " + std::to_string(mn) +
                                     " beyond tolerance (scheme instability)");
        }
        for (auto& v : u) {
            if (v < 0.0) v = 0.0;
        }
        if (opts.with_companion) {
            for (auto& v : comp) {
                if (v < 0.0) v = 0.0;
            }
        }

        double mass = trapezoid(u, dx);
        stats.max_mass_increase = std::max(stats.max_mass_increase, mass - prev_mass);
        pcurve[j] = mass;
        record(j, u);

        if (auto it = kills.find(j); it != kills.end()) {
            apply_kill(u, *lat, it->second, opts.weighting, opts.rule);
            ++stats.kills;
            mass = trapezoid(u, dx);
            // below the cut the survival distribution must sit flat at the new mass
            suffix_trapezoid(u, dx, wrow);
            double beta = it->second;
            for (int k = 0; k < n && lat->x(k) < beta - dx; ++k) {
                stats.max_postkill_flat_gap =
                    std::max(stats.max_postkill_flat_gap, std::abs(wrow[k] - mass));
            }
            if (opts.scheme.rannacher_half_steps > 0) {
                rannacher_pending = (opts.scheme.rannacher_half_steps + 1) / 2;
            }
        }
        prev_mass = mass;
    }

    std::vector<double> pt, pv;
    if (tg.front() > 0.0) {
        pt.push_back(0.0);
        pv.push_back(1.0);
    }
    pt.insert(pt.end(), tg.begin(), tg.end());
    pv.insert(pv.end(), pcurve.begin(), pcurve.end());
    res.p = SurvivalCurve::from_samples(std::move(pt), std::move(pv));
    return res;
}

RefineResult refine_direct(const DiffusionSpec& spec, const InitialDistribution& init,
                           const Boundary& b, int n0, int n_max, LatticePtr lat,
                           const RefineOptions& opts) {
    if (n_max < n0 || n_max - n0 < 1) {
        throw std::invalid_argument("refine_direct: need at least two levels");
    }
    RefineResult out;
    DirectOptions dopts = opts.direct;
    dopts.store_fields = false;
    dopts.with_companion = false;
    for (int nlev = n0; nlev <= n_max; ++nlev) {
        auto res = solve_direct_landmark(spec, init, b, nlev, lat, dopts);
        out.levels.push_back(nlev);
        out.curves.push_back(std::move(res.p));
    }
    // monotone chain p_n >= p_{n+1} at every march time
    for (size_t i = 0; i + 1 < out.curves.size(); ++i) {
        const auto& a = out.curves[i].values();
        const auto& c = out.curves[i + 1].values();
        for (size_t j = 0; j < a.size(); ++j) {
            out.max_monotonicity_violation =
                std::max(out.max_monotonicity_violation, c[j] - a[j]);
        }
    }
    if (out.max_monotonicity_violation > opts.monotonicity_tol) {
        throw std::runtime_error("refine_direct: monotone chain violated by " +
                                 std::to_string(out.max_monotonicity_violation) +
                                 " (killing times not nested on the lattice?)");
    }
    // Level-limit estimate. The bias at level n expands in powers of
    // q = 2^{-n/2} (discrete-monitoring scale) plus a 2^n term carrying the
    // per-kill time-stepping error (kill count x O(dt^2)). Fit the last k
    // levels against {1, q, q^2, ..., 2^n} and keep the constant; the 2^n
    // column only separates from the q powers once the ladder is deep enough,
    // so shallow ladders fall back to plain Richardson in q.
    int k = std::min<int>(opts.extrapolation_points, static_cast<int>(out.curves.size()));
    const bool with_kill_term = k >= 4;
    const int nlev = static_cast<int>(out.curves.size());
    std::vector<std::vector<double>> basis(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
        int lev = out.levels[nlev - k + i];
        double q = std::pow(2.0, -0.5 * lev);
        for (int m = 0; m + 1 < k; ++m) basis[i][m] = std::pow(q, m);
        basis[i][k - 1] = with_kill_term ? std::pow(2.0, lev) : std::pow(q, k - 1);
    }
    // coefficients of the limit functional: e_0^T B^{-1} applied to the values,
    // done once by solving B^T c = e_0
    std::vector<double> coeff(k, 0.0);
    {
        std::vector<std::vector<double>> bt(k, std::vector<double>(k));
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) bt[i][j] = basis[j][i];
        }
        std::vector<double> e0(k, 0.0);
        e0[0] = 1.0;
        // Gaussian elimination with partial pivoting
        for (int c = 0; c < k; ++c) {
            int piv = c;
            for (int r = c + 1; r < k; ++r) {
                if (std::abs(bt[r][c]) > std::abs(bt[piv][c])) piv = r;
            }
            std::swap(bt[c], bt[piv]);
            std::swap(e0[c], e0[piv]);
            for (int r = c + 1; r < k; ++r) {
                double f = bt[r][c] / bt[c][c];
                for (int m = c; m < k; ++m) bt[r][m] -= f * bt[c][m];
                e0[r] -= f * e0[c];
            }
        }
        for (int r = k - 1; r >= 0; --r) {
            double s = e0[r];
            for (int m = r + 1; m < k; ++m) s -= bt[r][m] * coeff[m];
            coeff[r] = s / bt[r][r];
        }
    }
    // Between kill times p_n carries the unkilled marginal, whose phase within
    // the kill cycle is level dependent; the smooth-in-level model only holds
    // where every ladder level has just completed a cycle. By the nesting
    // property those are exactly the coarsest level's landmark times, so the
    // limit curve is sampled there.
    const auto& times = out.curves.back().times();
    auto node_lm = landmarks(b, out.levels[nlev - k]);
    std::vector<double> ext_t{0.0}, ext_p{1.0};
    auto value_at = [&](const SurvivalCurve& c, double t) { return c.value(t); };
    for (const auto& pt : node_lm.points) {
        if (!(pt.time > times.front() && pt.time <= times.back())) continue;
        if (pt.time <= ext_t.back()) continue;  // adjacent cells may share a landmark
        double v = 0.0;
        for (int i = 0; i < k; ++i) {
            v += coeff[i] * value_at(out.curves[nlev - k + i], pt.time);
        }
        ext_t.push_back(pt.time);
        ext_p.push_back(v);
    }
    if (ext_t.back() < times.back()) {
        double v = 0.0;
        for (int i = 0; i < k; ++i) {
            v += coeff[i] * value_at(out.curves[nlev - k + i], times.back());
        }
        ext_t.push_back(times.back());
        ext_p.push_back(v);
    }
    for (auto& v : ext_p) v = std::clamp(v, 0.0, 1.0);
    for (size_t j = 1; j < ext_p.size(); ++j) ext_p[j] = std::min(ext_p[j], ext_p[j - 1]);
    out.extrapolated = SurvivalCurve::from_samples(std::move(ext_t), std::move(ext_p));
    return out;
}

std::vector<FluxResidualPoint> flux_residual(const SurvivalCurve& p, const DensityField& u,
                                             const Boundary& b, const DiffusionSpec& spec,
                                             double clearance) {
    std::vector<FluxResidualPoint> out;
    const Lattice& lat = u.lattice();
    const double dx = lat.dx();
    for (size_t j = 1; j + 1 < u.rows(); ++j) {
        double t = u.row_time(j);
        FluxResidualPoint pt;
        pt.t = t;
        double tm = u.row_time(j - 1), tp = u.row_time(j + 1);
        double pdot = (p.value(tp) - p.value(tm)) / (tp - tm);
        double beta = t <= b.horizon() ? b.value(t) : kNegInf;
        int k0 = 0;
        if (beta == kNegInf) {
            k0 = 0;
            pt.reliable = true;
        } else {
            k0 = static_cast<int>(std::ceil((beta + clearance - lat.x_min) / dx - 1e-9));
            if (k0 < 1 || k0 > lat.nx - 3) {
                pt.reliable = false;
                k0 = std::clamp(k0, 0, lat.nx - 3);
            }
        }
        auto f = [&](int k) {
            double s = spec.sigma(lat.x(k), t);
            return s * s * u.at(j, k);
        };
        double fx = (-3.0 * f(k0) + 4.0 * f(k0 + 1) - f(k0 + 2)) / (2.0 * dx);
        pt.residual = pdot + 0.5 * fx;
        out.push_back(pt);
    }
    return out;
}

}  // namespace ifpp
