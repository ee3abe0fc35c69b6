#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ifpp/boundary.hpp"
#include "ifpp/diffusion.hpp"
#include "ifpp/grid.hpp"
#include "ifpp/mc_oracle.hpp"
#include "ifpp/survival.hpp"

namespace ifpp {

// All CSV output uses '.' decimals and round-trip precision, independent of locale.

/// Boundary CSV: header `t,b`; the literal token `-inf` encodes -infinity.
Boundary read_boundary_csv(const std::filesystem::path& path, BoundaryInterp interp,
                           std::optional<double> horizon = std::nullopt);
void write_boundary_csv(const std::filesystem::path& path, const std::vector<double>& t,
                        const std::vector<double>& b);
void write_boundary_csv(const std::filesystem::path& path, const Boundary& b, int samples = 512);

/// Survival CSV: header `t,p`. Monotonicity violations below 1e-9 are repaired
/// by isotonic clamping; larger ones are rejected.
SurvivalCurve read_survival_csv(const std::filesystem::path& path,
                                std::optional<double> horizon = std::nullopt);
void write_survival_csv(const std::filesystem::path& path, const SurvivalCurve& p);

/// Field dump: header row of x nodes, first column of t nodes.
void write_field_csv(const std::filesystem::path& path, const GridField& f);

void write_estimate_csv(const std::filesystem::path& path, const CrossingEstimate& est);
void write_landmarks_csv(const std::filesystem::path& path, const LandmarkSet& lm);

/// Diffusion specs declared in JSON: {"kind": "bm"|"bm-drift"|"custom", ...}.
/// Custom coefficients must be registered programmatically by name.
DiffusionSpec spec_from_json(const nlohmann::json& j);
InitialDistribution init_from_json(const nlohmann::json& j);

void register_diffusion(const std::string& name, DiffusionSpec spec);
bool diffusion_registered(const std::string& name);

/// Discretization knobs shared by the CLI commands; every report embeds the
/// full effective config plus its hash.
struct SolverConfig {
    double dx = 0.005;
    double dt = 5e-4;
    double theta = 0.5;
    int rannacher_half_steps = 2;
    int level = 10;
    int refine_from = 8;
    bool extrapolate = true;
    double warm_start_time = 1e-4;
    double pad_sd = 8.0;
    double quantile_eps = 1e-6;
    double psor_omega = 1.5;
    double psor_tol = 1e-10;
    int psor_max_sweeps = 10000;
    double eps_w_rel = 1e-8;
    double activity_tol = 1e-9;
    int t_min_rows = 10;
    long long mc_paths = 200000;
    double mc_dt = 1e-3;
    uint64_t seed = 946231;
    bool bridge = true;
};

nlohmann::json config_to_json(const SolverConfig& c);
SolverConfig config_from_json(const nlohmann::json& j);
std::string config_hash(const SolverConfig& c);

}  // namespace ifpp
