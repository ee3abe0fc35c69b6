#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ifpp/boundary.hpp"
#include "ifpp/diffusion.hpp"

namespace ifpp {

/// Space-time lattice: uniform in x, possibly nonuniform in t. Times that a
/// direct solve kills at must appear in t exactly; the builders below take
/// care of that.
struct Lattice {
    double x_min = 0.0, x_max = 1.0;
    int nx = 2;
    std::vector<double> t;

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double x(int k) const { return x_min + k * dx(); }
    size_t nt() const { return t.size(); }
    double horizon() const { return t.back(); }

    void validate() const;  // throws std::invalid_argument on malformed grids

    /// Index of the exact match for time tt, or -1. Matches within
    /// 1e-12*max(1,|tt|) to absorb parser round-trips.
    int find_time(double tt) const;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Builds a time grid on [t_start, horizon] containing every required time
/// exactly, with gaps filled so no step exceeds dt. Optionally grades the
/// start geometrically from t_start (used after point-mass warm starts).
std::vector<double> build_time_grid(double t_start, double horizon, double dt,
                                    std::vector<double> required, bool graded_start = false);

struct LatticeParams {
    double dx = 0.005;
    double dt = 5e-4;
    double pad_sd = 8.0;          // far-field padding in units of sigma_max * sqrt(T)
    double quantile_eps = 1e-6;   // initial-law quantile for the core box
    double warm_start_time = 1e-4;  // PDE start for point-mass initial data
    bool graded_start = true;
    std::vector<double> extra_times;  // output times etc.
};

/// Truncated domain per the far-field rule; the time grid contains all
/// landmark times of `b` up to `level` (pass level < 0 or a null boundary for
/// inverse solves where no boundary is known upfront).
Lattice make_lattice(const DiffusionSpec& spec, const InitialDistribution& init,
                     const Boundary* b, int level, double horizon, const LatticeParams& params);

/// Row-major (time x space) grid sampling shared by density and survival data.
class GridField {
  public:
    GridField() = default;
    GridField(LatticePtr lat, std::vector<double> row_times)
        : lat_(std::move(lat)), row_times_(std::move(row_times)),
          data_(row_times_.size() * static_cast<size_t>(lat_->nx), 0.0) {}

    size_t rows() const { return row_times_.size(); }
    int nx() const { return lat_->nx; }
    double row_time(size_t j) const { return row_times_[j]; }
    const std::vector<double>& row_times() const { return row_times_; }
    const Lattice& lattice() const { return *lat_; }
    LatticePtr lattice_ptr() const { return lat_; }

    std::span<double> row(size_t j) { return {data_.data() + j * nx(), static_cast<size_t>(nx())}; }
    std::span<const double> row(size_t j) const {
        return {data_.data() + j * nx(), static_cast<size_t>(nx())};
    }
    double at(size_t j, int k) const { return data_[j * nx() + k]; }
    double& at(size_t j, int k) { return data_[j * nx() + k]; }

  private:
    LatticePtr lat_;
    std::vector<double> row_times_;
    std::vector<double> data_;
};

/// U(x,t): sub-probability density of surviving paths.
using DensityField = GridField;
/// w(x,t): survival distribution, nonincreasing in x per row.
using SurvivalField = GridField;

/// Tridiagonal representation of a spatial operator: (S u)_k =
/// lower_k u_{k-1} + diag_k u_k + upper_k u_{k+1} on interior nodes.
struct OperatorStencil {
    std::vector<double> lower, diag, upper;
    void resize(int nx) {
        lower.assign(nx, 0.0);
        diag.assign(nx, 0.0);
        upper.assign(nx, 0.0);
    }
};

/// Spatial part of the divergence-form operator governing w:
/// -1/2 d/dx(sigma^2 dw/dx) + mu dw/dx, second-order central.
void assemble_divergence_form(const DiffusionSpec& spec, const Lattice& lat, double t,
                              OperatorStencil& s);

/// Spatial part of the Kolmogorov forward (Fokker-Planck) operator governing U:
/// -1/2 d^2/dx^2(sigma^2 U) + d/dx(mu U), second-order central.
void assemble_fokker_planck(const DiffusionSpec& spec, const Lattice& lat, double t,
                            OperatorStencil& s);

/// Applies the assembled stencil to a row (interior nodes; endpoints get 0).
void apply_stencil(const OperatorStencil& s, std::span<const double> u, std::span<double> out);

/// Convenience wrappers used by the manufactured-solution tests.
void apply_divergence_form(const DiffusionSpec& spec, const Lattice& lat,
                           std::span<const double> row, double t, std::span<double> out);
void apply_fokker_planck(const DiffusionSpec& spec, const Lattice& lat,
                         std::span<const double> row, double t, std::span<double> out);

/// Thomas algorithm for tridiagonal systems; rhs is overwritten with the solution.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

struct ThetaScheme {
    double theta = 0.5;
    int rannacher_half_steps = 2;  // implicit-Euler half steps after each projection
};

/// One theta step of du/dt + S u = 0 with Dirichlet data at both ends.
/// s0 is the stencil at the old time, s1 at the new.
void theta_step(const OperatorStencil& s0, const OperatorStencil& s1, double dt, double theta,
                std::span<const double> u_old, std::span<double> u_new, double left_bc,
                double right_bc);

}  // namespace ifpp
