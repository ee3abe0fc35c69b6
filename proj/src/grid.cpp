#include "ifpp/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ifpp {

void Lattice::validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("lattice: x_min < x_max required");
    if (nx < 16) throw std::invalid_argument("lattice: need at least 16 space nodes");
    if (t.size() < 2) throw std::invalid_argument("lattice: need at least 2 time nodes");
    for (size_t j = 0; j + 1 < t.size(); ++j) {
        if (!(t[j] < t[j + 1])) throw std::invalid_argument("lattice: times must strictly increase");
    }
}

int Lattice::find_time(double tt) const {
    auto it = std::lower_bound(t.begin(), t.end(), tt - 1e-12 * std::max(1.0, std::abs(tt)));
    if (it == t.end()) return -1;
    if (std::abs(*it - tt) <= 1e-12 * std::max(1.0, std::abs(tt))) {
        return static_cast<int>(it - t.begin());
    }
    return -1;
}

std::vector<double> build_time_grid(double t_start, double horizon, double dt,
                                    std::vector<double> required, bool graded_start) {
    if (!(horizon > t_start)) throw std::invalid_argument("time grid: horizon must exceed start");
    if (!(dt > 0.0)) throw std::invalid_argument("time grid: dt must be positive");

    std::vector<double> anchors{t_start, horizon};
    for (double r : required) {
        if (r > t_start && r < horizon) anchors.push_back(r);
    }
    if (graded_start && t_start > 0.0) {
        // geometric ramp out of the warm start until steps reach dt
        for (double s = 2.0 * t_start; s < std::min(horizon, 64.0 * dt); s *= 2.0) {
            if (s > t_start) anchors.push_back(s);
        }
    }
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end(),
                              [](double a, double b) {
                                  return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b));
                              }),
                  anchors.end());

    std::vector<double> grid;
    grid.push_back(anchors.front());
    for (size_t i = 0; i + 1 < anchors.size(); ++i) {
        double a = anchors[i], b = anchors[i + 1];
        int m = std::max(1, static_cast<int>(std::ceil((b - a) / dt - 1e-9)));
        for (int j = 1; j < m; ++j) grid.push_back(a + (b - a) * j / m);
        grid.push_back(b);  // anchors enter exactly, intermediate points are derived
    }
    return grid;
}

Lattice make_lattice(const DiffusionSpec& spec, const InitialDistribution& init,
                     const Boundary* b, int level, double horizon, const LatticeParams& params) {
    Lattice lat;
    double q_lo = init.quantile(params.quantile_eps);
    double q_hi = init.quantile(1.0 - params.quantile_eps);

    // sigma_max sampled over the core box
    double smax = spec.vol_lower_bound;
    for (int i = 0; i <= 32; ++i) {
        double x = q_lo - 1.0 + (q_hi - q_lo + 2.0) * i / 32.0;
        for (int j = 0; j <= 8; ++j) {
            smax = std::max(smax, spec.sigma(x, horizon * j / 8.0));
        }
    }
    double pad = params.pad_sd * smax * std::sqrt(horizon);

    double lo_core = q_lo;
    if (b != nullptr) {
        double binf = b->finite_infimum();
        if (binf != kPosInf) lo_core = std::min(lo_core, binf);
    }
    lat.x_min = lo_core - pad;
    lat.x_max = q_hi + pad;
    lat.nx = std::max(16, static_cast<int>(std::llround((lat.x_max - lat.x_min) / params.dx)) + 1);

    double t_start = init.is_point_mass() ? params.warm_start_time : 0.0;
    std::vector<double> required = params.extra_times;
    if (b != nullptr && level >= 0) {
        auto lm = landmarks(*b, level);
        for (const auto& pt : lm.points) required.push_back(pt.time);
    }
    lat.t = build_time_grid(t_start, horizon, params.dt, std::move(required),
                            params.graded_start && init.is_point_mass());
    lat.validate();
    return lat;
}

void assemble_divergence_form(const DiffusionSpec& spec, const Lattice& lat, double t,
                              OperatorStencil& s) {
    const int n = lat.nx;
    const double dx = lat.dx();
    s.resize(n);
    double sm = spec.sigma(lat.x(0) + 0.5 * dx, t);
    double sig2m = sm * sm;
    for (int k = 1; k + 1 < n; ++k) {
        double sp = spec.sigma(lat.x(k) + 0.5 * dx, t);
        double sig2p = sp * sp;
        double mu = spec.mu(lat.x(k), t);
        double adv = mu / (2.0 * dx);
        s.lower[k] = -0.5 * sig2m / (dx * dx) - adv;
        s.upper[k] = -0.5 * sig2p / (dx * dx) + adv;
        s.diag[k] = 0.5 * (sig2m + sig2p) / (dx * dx);
        sig2m = sig2p;
    }
}

void assemble_fokker_planck(const DiffusionSpec& spec, const Lattice& lat, double t,
                            OperatorStencil& s) {
    const int n = lat.nx;
    const double dx = lat.dx();
    s.resize(n);
    auto sig2 = [&](int k) {
        double v = spec.sigma(lat.x(k), t);
        return v * v;
    };
    double sm = sig2(0), sc = sig2(1);
    for (int k = 1; k + 1 < n; ++k) {
        double sp = sig2(k + 1);
        double mum = spec.mu(lat.x(k - 1), t);
        double mup = spec.mu(lat.x(k + 1), t);
        s.lower[k] = -0.5 * sm / (dx * dx) - mum / (2.0 * dx);
        s.upper[k] = -0.5 * sp / (dx * dx) + mup / (2.0 * dx);
        s.diag[k] = sc / (dx * dx);
        sm = sc;
        sc = sp;
    }
}

void apply_stencil(const OperatorStencil& s, std::span<const double> u, std::span<double> out) {
    const size_t n = u.size();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for (size_t k = 1; k + 1 < n; ++k) {
        out[k] = s.lower[k] * u[k - 1] + s.diag[k] * u[k] + s.upper[k] * u[k + 1];
    }
}

void apply_divergence_form(const DiffusionSpec& spec, const Lattice& lat,
                           std::span<const double> row, double t, std::span<double> out) {
    OperatorStencil s;
    assemble_divergence_form(spec, lat, t, s);
    apply_stencil(s, row, out);
}

void apply_fokker_planck(const DiffusionSpec& spec, const Lattice& lat,
                         std::span<const double> row, double t, std::span<double> out) {
    OperatorStencil s;
    assemble_fokker_planck(spec, lat, t, s);
    apply_stencil(s, row, out);
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const size_t n = rhs.size();
    static thread_local std::vector<double> cp;
    cp.assign(n, 0.0);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    rhs[0] /= beta;
    for (size_t k = 1; k < n; ++k) {
        cp[k] = upper[k - 1] / beta;
        beta = diag[k] - lower[k] * cp[k];
        if (beta == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / beta;
    }
    for (size_t k = n - 1; k-- > 0;) {
        rhs[k] -= cp[k + 1] * rhs[k + 1];
    }
}

void theta_step(const OperatorStencil& s0, const OperatorStencil& s1, double dt, double theta,
                std::span<const double> u_old, std::span<double> u_new, double left_bc,
                double right_bc) {
    const size_t n = u_old.size();
    static thread_local std::vector<double> lo, di, up, rhs;
    lo.assign(n, 0.0);
    di.assign(n, 1.0);
    up.assign(n, 0.0);
    rhs.assign(n, 0.0);

    const double ex = (1.0 - theta) * dt;
    for (size_t k = 1; k + 1 < n; ++k) {
        rhs[k] = u_old[k] - ex * (s0.lower[k] * u_old[k - 1] + s0.diag[k] * u_old[k] +
                                  s0.upper[k] * u_old[k + 1]);
        lo[k] = theta * dt * s1.lower[k];
        di[k] = 1.0 + theta * dt * s1.diag[k];
        up[k] = theta * dt * s1.upper[k];
    }
    rhs[0] = left_bc;
    rhs[n - 1] = right_bc;
    solve_tridiagonal(lo, di, up, rhs);
    std::copy(rhs.begin(), rhs.end(), u_new.begin());
}

}  // namespace ifpp
