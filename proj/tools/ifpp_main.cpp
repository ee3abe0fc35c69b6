// ifpp: first-passage / inverse first-passage solver suite.
//
// Subcommands: direct, inverse, mc, roundtrip-pb, roundtrip-bp, bench,
// landmarks. Exit codes: 0 = pass, 2 = tolerance failure, 1 = error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifpp/analytic.hpp"
#include "ifpp/boundary.hpp"
#include "ifpp/direct_solver.hpp"
#include "ifpp/inverse_solver.hpp"
#include "ifpp/io.hpp"
#include "ifpp/mc_oracle.hpp"

using nlohmann::json;
using namespace ifpp;

namespace {

struct CommonArgs {
    std::string spec_path;
    std::string config_path;
    double horizon = 1.0;
};

void register_builtin_customs() {
    DiffusionSpec tanh_vol;
    tanh_vol.drift = [](double, double) { return 0.0; };
    tanh_vol.vol = [](double x, double) { return 1.0 + 0.5 * std::tanh(x); };
    tanh_vol.vol_lower_bound = 0.5;
    tanh_vol.bound_m = 0.0;
    tanh_vol.name = "tanh-vol";
    register_diffusion("tanh-vol", tanh_vol);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    json j;
    in >> j;
    return j;
}

SolverConfig load_config(const std::string& path) {
    if (path.empty()) return SolverConfig{};
    return config_from_json(load_json(path));
}

json report_header(const SolverConfig& cfg, const json& spec_json) {
    return json{{"config", config_to_json(cfg)},
                {"config_hash", config_hash(cfg)},
                {"spec", spec_json}};
}

void write_report(const std::string& path, const json& rep) {
    if (path.empty()) return;
    std::ofstream out(path);
    out << rep.dump(2) << "\n";
}

LatticeParams lattice_params(const SolverConfig& cfg, std::vector<double> extra = {}) {
    LatticeParams lp;
    lp.dx = cfg.dx;
    lp.dt = cfg.dt;
    lp.pad_sd = cfg.pad_sd;
    lp.quantile_eps = cfg.quantile_eps;
    lp.warm_start_time = cfg.warm_start_time;
    lp.extra_times = std::move(extra);
    return lp;
}

InverseOptions inverse_options(const SolverConfig& cfg) {
    InverseOptions io;
    io.scheme.theta = cfg.theta;
    io.scheme.rannacher_half_steps = cfg.rannacher_half_steps;
    io.psor.omega = cfg.psor_omega;
    io.psor.tol = cfg.psor_tol;
    io.psor.max_sweeps = cfg.psor_max_sweeps;
    io.eps_w_rel = cfg.eps_w_rel;
    io.activity_tol = cfg.activity_tol;
    io.t_min_rows = cfg.t_min_rows;
    io.store_field = false;
    return io;
}

SurvivalCurve run_direct_curve(const DiffusionSpec& spec, const InitialDistribution& init,
                               const Boundary& b, const SolverConfig& cfg, double horizon) {
    auto lat = std::make_shared<Lattice>(
        make_lattice(spec, init, &b, cfg.level, horizon, lattice_params(cfg)));
    if (cfg.extrapolate && cfg.level > cfg.refine_from) {
        RefineOptions ro;
        ro.direct.scheme.theta = cfg.theta;
        auto ref = refine_direct(spec, init, b, cfg.refine_from, cfg.level, lat, ro);
        return ref.extrapolated;
    }
    DirectOptions dop;
    dop.scheme.theta = cfg.theta;
    dop.store_fields = false;
    return solve_direct_landmark(spec, init, b, cfg.level, lat, dop).p;
}

int cmd_direct(const CommonArgs& common, const std::string& boundary_path, int level,
               const std::string& out_path, const std::string& dump_dir,
               const std::string& interp) {
    auto spec_json = load_json(common.spec_path);
    auto spec = spec_from_json(spec_json);
    auto init = init_from_json(spec_json);
    auto cfg = load_config(common.config_path);
    if (level > 0) cfg.level = level;
    auto b = read_boundary_csv(boundary_path,
                               interp == "constant-left" ? BoundaryInterp::piecewise_constant
                                                         : BoundaryInterp::piecewise_linear,
                               common.horizon);
    auto lat = std::make_shared<Lattice>(
        make_lattice(spec, init, &b, cfg.level, common.horizon, lattice_params(cfg)));
    DirectOptions dop;
    dop.scheme.theta = cfg.theta;
    dop.store_fields = !dump_dir.empty();
    if (!dump_dir.empty()) {
        for (int j = 0; j <= 100; ++j) dop.output_times.push_back(common.horizon * j / 100.0);
    }
    auto res = solve_direct_landmark(spec, init, b, cfg.level, lat, dop);
    write_survival_csv(out_path, res.p);
    if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        write_field_csv(std::filesystem::path(dump_dir) / "density.csv", res.density);
        write_field_csv(std::filesystem::path(dump_dir) / "survival_field.csv", res.survival);
    }
    std::printf("direct: level %d, %d kills, p(T) = %.6f\n", cfg.level, res.stats.kills,
                res.p.value(common.horizon));
    return 0;
}

int cmd_inverse(const CommonArgs& common, const std::string& survival_path,
                const std::string& out_path, const std::string& report_path) {
    auto spec_json = load_json(common.spec_path);
    auto spec = spec_from_json(spec_json);
    auto init = init_from_json(spec_json);
    auto cfg = load_config(common.config_path);
    auto p = read_survival_csv(survival_path, common.horizon);
    auto lat = std::make_shared<Lattice>(
        make_lattice(spec, init, nullptr, -1, p.horizon(), lattice_params(cfg)));
    auto rep = solve_inverse(spec, init, p, lat, cfg.psor_tol, inverse_options(cfg));
    write_boundary_csv(out_path, rep.b_hat);

    int max_sweeps = 0;
    long long total_sweeps = 0;
    for (int s : rep.psor_iterations) {
        max_sweeps = std::max(max_sweeps, s);
        total_sweeps += s;
    }
    json jr = report_header(cfg, spec_json);
    jr["result"] = {{"constraint_violation", rep.constraint_violation},
                    {"complementarity_residual", rep.complementarity_residual},
                    {"decrease_rate", rep.decrease_rate_full},
                    {"largest_down_step", rep.largest_down_step},
                    {"t_min", rep.t_min},
                    {"min_w", rep.min_w},
                    {"psor_max_sweeps", max_sweeps},
                    {"psor_total_sweeps", total_sweeps}};
    write_report(report_path, jr);
    std::printf("inverse: %zu rows, b(T) = %.6f, feasibility %.2e\n", rep.row_times.size(),
                rep.b_hat.value(p.horizon()), rep.constraint_violation);
    return 0;
}

int cmd_mc(const CommonArgs& common, const std::string& boundary_path, long long paths, double dt,
           uint64_t seed, bool bridge, const std::string& out_path, const std::string& interp) {
    auto spec_json = load_json(common.spec_path);
    auto spec = spec_from_json(spec_json);
    auto init = init_from_json(spec_json);
    auto b = read_boundary_csv(boundary_path,
                               interp == "constant-left" ? BoundaryInterp::piecewise_constant
                                                         : BoundaryInterp::piecewise_linear,
                               common.horizon);
    auto est = estimate_survival(spec, init, b, common.horizon, paths, dt, seed, bridge);
    write_estimate_csv(out_path, est);
    std::printf("mc: %lld paths, p_hat(T) = %.6f +- %.6f, disagreements = %lld\n", est.n_paths,
                est.p_hat.back(), est.ci_half_width.back(), est.strict_nonstrict_disagreements);
    return 0;
}

int cmd_roundtrip_pb(const CommonArgs& common, const std::string& survival_path,
                     const std::string& report_path, const std::string& out_prefix, double tol) {
    auto spec_json = load_json(common.spec_path);
    auto spec = spec_from_json(spec_json);
    auto init = init_from_json(spec_json);
    auto cfg = load_config(common.config_path);
    auto p = read_survival_csv(survival_path, common.horizon);
    double T = p.horizon();

    auto lat = std::make_shared<Lattice>(
        make_lattice(spec, init, nullptr, -1, T, lattice_params(cfg)));
    auto inv = solve_inverse(spec, init, p, lat, cfg.psor_tol, inverse_options(cfg));

    std::vector<double> out_times;
    for (int j = 1; j <= 20; ++j) out_times.push_back(T * j / 20.0);
    auto est = estimate_survival(spec, init, inv.b_hat, T, cfg.mc_paths, cfg.mc_dt, cfg.seed,
                                 cfg.bridge, out_times);
    auto pde = run_direct_curve(spec, init, inv.b_hat, cfg, T);

    double gap_mc = 0.0, gap_pde = 0.0, max_ci = 0.0;
    for (size_t i = 0; i < est.times.size(); ++i) {
        gap_mc = std::max(gap_mc, std::abs(est.p_hat[i] - p.value(est.times[i])));
        max_ci = std::max(max_ci, est.ci_half_width[i]);
        gap_pde = std::max(gap_pde, std::abs(pde.value(est.times[i]) - p.value(est.times[i])));
    }
    bool pass = gap_mc <= std::max(tol, 3.0 * max_ci);

    json jr = report_header(cfg, spec_json);
    jr["result"] = {{"sup_gap_mc", gap_mc},
                    {"sup_gap_direct", gap_pde},
                    {"max_ci_half_width", max_ci},
                    {"tolerance", tol},
                    {"constraint_violation", inv.constraint_violation},
                    {"decrease_rate", inv.decrease_rate_full},
                    {"pass", pass}};
    write_report(report_path, jr);
    if (!out_prefix.empty()) {
        write_boundary_csv(out_prefix + "_bhat.csv", inv.b_hat);
        write_estimate_csv(out_prefix + "_mc.csv", est);
    }
    std::printf("roundtrip-pb: sup|p_mc - p| = %.5f (3*CI %.5f, tol %.5f), direct gap %.5f -> %s\n",
                gap_mc, 3.0 * max_ci, tol, gap_pde, pass ? "pass" : "FAIL");
    return pass ? 0 : 2;
}

int cmd_roundtrip_bp(const CommonArgs& common, const std::string& boundary_path,
                     const std::string& report_path, double tol, double t_cmp_min,
                     const std::string& interp) {
    auto spec_json = load_json(common.spec_path);
    auto spec = spec_from_json(spec_json);
    auto init = init_from_json(spec_json);
    auto cfg = load_config(common.config_path);
    auto b = read_boundary_csv(boundary_path,
                               interp == "constant-left" ? BoundaryInterp::piecewise_constant
                                                         : BoundaryInterp::piecewise_linear,
                               common.horizon);
    double T = b.horizon();
    auto b0 = check_b0(b, spec, init, cfg.seed);
    auto p = run_direct_curve(spec, init, b, cfg, T);
    auto lat = std::make_shared<Lattice>(
        make_lattice(spec, init, nullptr, -1, T, lattice_params(cfg)));
    auto inv = solve_inverse(spec, init, p, lat, cfg.psor_tol, inverse_options(cfg));

    double sup_gap = 0.0;
    for (size_t j = 0; j < inv.row_times.size(); ++j) {
        double t = inv.row_times[j];
        if (t < t_cmp_min || t > T) continue;
        double target = b.value(t);
        double got = inv.b_rows[j];
        if (target == kNegInf && got == kNegInf) continue;
        sup_gap = std::max(sup_gap, std::abs(got - target));
    }
    bool pass = sup_gap <= tol;

    json jr = report_header(cfg, spec_json);
    jr["result"] = {{"sup_gap", sup_gap},
                    {"tolerance", tol},
                    {"compare_from", t_cmp_min},
                    {"b0_consistent", b0.consistent},
                    {"b0_notes", b0.notes},
                    {"pass", pass}};
    write_report(report_path, jr);
    std::printf("roundtrip-bp: sup|b_hat - b| = %.5f on [%.2f, %.2f] (tol %.3f) -> %s\n", sup_gap,
                t_cmp_min, T, tol, pass ? "pass" : "FAIL");
    return pass ? 0 : 2;
}

int cmd_bench(const std::string& kase, double x0, double barrier, double slope, double lambda,
              double horizon, int samples, const std::string& out_path) {
    if (kase == "exp") {
        write_survival_csv(out_path, exponential_curve(lambda, horizon, samples));
    } else {
        std::vector<double> t{0.0}, p{1.0};
        for (int j = 1; j < samples; ++j) {
            double tt = horizon * j / (samples - 1);
            t.push_back(tt);
            p.push_back(kase == "const" ? bm_constant_barrier_survival(x0, barrier, tt)
                                        : bm_linear_barrier_survival(x0, barrier, slope, tt));
        }
        write_survival_csv(out_path, SurvivalCurve::from_samples(std::move(t), std::move(p)));
    }
    std::printf("bench: wrote %s reference to %s\n", kase.c_str(), out_path.c_str());
    return 0;
}

int cmd_landmarks(const std::string& boundary_path, int level, double horizon,
                  const std::string& out_path, const std::string& interp) {
    auto b = read_boundary_csv(boundary_path,
                               interp == "constant-left" ? BoundaryInterp::piecewise_constant
                                                         : BoundaryInterp::piecewise_linear,
                               horizon);
    auto lm = landmarks(b, level);
    write_landmarks_csv(out_path, lm);
    std::printf("landmarks: level %d, %zu points\n", level, lm.points.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    register_builtin_customs();
    CLI::App app{"first-passage and inverse first-passage solver suite"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string boundary_path, survival_path, out_path, report_path, dump_dir, out_prefix;
    std::string interp = "linear";
    std::string bench_case = "const";
    int level = -1;
    long long paths = 100000;
    double dt = 1e-3;
    uint64_t seed = 946231;
    bool bridge = false;
    double tol = 0.01, t_cmp_min = 0.1;
    double x0 = 1.0, barrier = 0.0, slope = 0.5, lambda = 1.0;
    int samples = 201;

    auto add_common = [&](CLI::App* sc) {
        sc->add_option("--spec", common.spec_path, "spec JSON")->required();
        sc->add_option("--config", common.config_path, "solver config JSON");
        sc->add_option("--horizon", common.horizon, "time horizon");
    };

    auto* d = app.add_subcommand("direct", "survival curve for a given boundary");
    add_common(d);
    d->add_option("--boundary", boundary_path)->required();
    d->add_option("--level", level, "landmark level");
    d->add_option("--out", out_path)->required();
    d->add_option("--dump-fields", dump_dir, "directory for field CSV dumps");
    d->add_option("--interp", interp, "linear | constant-left");

    auto* i = app.add_subcommand("inverse", "boundary for a given survival curve");
    add_common(i);
    i->add_option("--survival", survival_path)->required();
    i->add_option("--out", out_path)->required();
    i->add_option("--report", report_path);

    auto* m = app.add_subcommand("mc", "Monte Carlo crossing estimate");
    add_common(m);
    m->add_option("--boundary", boundary_path)->required();
    m->add_option("--paths", paths);
    m->add_option("--dt", dt);
    m->add_option("--seed", seed);
    m->add_flag("--bridge", bridge, "Brownian-bridge correction");
    m->add_option("--out", out_path)->required();
    m->add_option("--interp", interp);

    auto* rpb = app.add_subcommand("roundtrip-pb", "curve -> boundary -> MC curve");
    add_common(rpb);
    rpb->add_option("--survival", survival_path)->required();
    rpb->add_option("--report", report_path);
    rpb->add_option("--out-prefix", out_prefix);
    rpb->add_option("--tol", tol, "sup-gap tolerance");

    auto* rbp = app.add_subcommand("roundtrip-bp", "boundary -> curve -> boundary");
    add_common(rbp);
    rbp->add_option("--boundary", boundary_path)->required();
    rbp->add_option("--report", report_path);
    rbp->add_option("--tol", tol, "sup-gap tolerance");
    rbp->add_option("--compare-from", t_cmp_min, "ignore rows before this time");
    rbp->add_option("--interp", interp);

    auto* be = app.add_subcommand("bench", "closed-form reference curves");
    be->add_option("--case", bench_case, "const | linear | exp")->required();
    be->add_option("--x0", x0);
    be->add_option("--barrier", barrier);
    be->add_option("--slope", slope);
    be->add_option("--lambda", lambda);
    be->add_option("--horizon", common.horizon);
    be->add_option("--samples", samples);
    be->add_option("--out", out_path)->required();

    auto* lm = app.add_subcommand("landmarks", "dump a landmark set as CSV");
    lm->add_option("--boundary", boundary_path)->required();
    lm->add_option("--level", level)->required();
    lm->add_option("--horizon", common.horizon);
    lm->add_option("--out", out_path)->required();
    lm->add_option("--interp", interp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (d->parsed()) {
            return cmd_direct(common, boundary_path, level, out_path, dump_dir, interp);
        }
        if (i->parsed()) return cmd_inverse(common, survival_path, out_path, report_path);
        if (m->parsed()) {
            return cmd_mc(common, boundary_path, paths, dt, seed, bridge, out_path, interp);
        }
        if (rpb->parsed()) {
            return cmd_roundtrip_pb(common, survival_path, report_path, out_prefix, tol);
        }
        if (rbp->parsed()) {
            return cmd_roundtrip_bp(common, boundary_path, report_path, tol, t_cmp_min, interp);
        }
        if (be->parsed()) {
            return cmd_bench(bench_case, x0, barrier, slope, lambda, common.horizon, samples,
                             out_path);
        }
        if (lm->parsed()) {
            return cmd_landmarks(boundary_path, level, common.horizon, out_path, interp);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
