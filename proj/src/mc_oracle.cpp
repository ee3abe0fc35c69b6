#include "ifpp/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ifpp/rng.hpp"

namespace ifpp {

CrossingEstimate estimate_survival(const DiffusionSpec& spec, const InitialDistribution& init,
                                   const Boundary& b, double horizon, long long n_paths, double dt,
                                   uint64_t seed, bool bridge,
                                   const std::vector<double>& output_times) {
    if (n_paths < 1000) throw std::invalid_argument("estimate_survival: need at least 1e3 paths");
    if (!(dt > 0.0) || dt > horizon / 100.0 + 1e-15) {
        throw std::invalid_argument("estimate_survival: dt must be positive and <= horizon/100");
    }
    const long long steps = std::llround(horizon / dt);
    const double sqrt_dt = std::sqrt(dt);

    // barrier precomputed on the monitoring grid; index 0 carries b*(0) so the
    // first bridge interval has a defined left value
    std::vector<double> bv(steps + 1, kNegInf);
    bv[0] = usc_envelope_at_zero(b);
    for (long long k = 1; k <= steps; ++k) {
        double t = std::min(k * dt, b.horizon());
        bv[k] = b.value(t);
    }

    std::vector<double> sum_v(steps + 1, 0.0), sum_v2(steps + 1, 0.0);
    std::vector<long long> alive_strict_cnt(steps + 1, 0), alive_nonstrict_cnt(steps + 1, 0);
    long long disagreements = 0;

    for (long long path = 0; path < n_paths; ++path) {
        NormalSampler rng(seed, static_cast<uint64_t>(path));
        double x = init.quantile(rng.uniform01());
        bool alive_strict = true, alive_nonstrict = true;
        long long death_strict = -1, death_nonstrict = -1;
        double wgt = 1.0;

        for (long long k = 1; k <= steps; ++k) {
            double t_prev = (k - 1) * dt;
            double mu = spec.drift(x, t_prev);
            double sg = spec.vol(x, t_prev);
            double x_new = x + mu * dt + sg * sqrt_dt * rng.normal();
            if (!std::isfinite(x_new)) {
                throw std::runtime_error("estimate_survival: path value blew up (coefficients?)");
            }
            double bk = bv[k];
            if (alive_nonstrict) {
                if (x_new < bk) {
                    alive_nonstrict = false;
                    alive_strict = false;
                    death_nonstrict = k;
                    death_strict = k;
                    wgt = 0.0;
                } else if (x_new == bk) {
                    alive_nonstrict = false;
                    death_nonstrict = k;
                    wgt = 0.0;
                }
            } else if (alive_strict && x_new < bk) {
                alive_strict = false;
                death_strict = k;
            }
            if (bridge && wgt > 0.0) {
                double b_prev = bv[k - 1];
                if (b_prev != kNegInf && bk != kNegInf) {
                    double a = x - b_prev, c = x_new - bk;
                    if (a > 0.0 && c > 0.0) {
                        wgt *= 1.0 - std::exp(-2.0 * a * c / (sg * sg * dt));
                    }
                }
            }
            x = x_new;

            double v = bridge ? wgt : (alive_nonstrict ? 1.0 : 0.0);
            if (v > 0.0) {
                sum_v[k] += v;
                sum_v2[k] += v * v;
            }
            if (alive_strict) ++alive_strict_cnt[k];
            if (alive_nonstrict) ++alive_nonstrict_cnt[k];
            if (!alive_strict && v == 0.0) break;  // nothing further to accumulate
        }
        if (death_strict != death_nonstrict) ++disagreements;
    }

    CrossingEstimate est;
    est.n_paths = n_paths;
    est.dt = dt;
    est.bridge_correction = bridge;
    est.strict_nonstrict_disagreements = disagreements;

    std::vector<long long> idx;
    if (output_times.empty()) {
        long long stride = std::max<long long>(1, steps / 256);
        for (long long k = stride; k <= steps; k += stride) idx.push_back(k);
        if (idx.back() != steps) idx.push_back(steps);
    } else {
        for (double t : output_times) {
            long long k = std::clamp<long long>(std::llround(t / dt), 1, steps);
            idx.push_back(k);
        }
    }
    const double z99 = 2.5758293035489004;  // 99% two-sided normal quantile
    const double n = static_cast<double>(n_paths);
    for (long long k : idx) {
        double mean = sum_v[k] / n;
        double var = std::max(0.0, (sum_v2[k] - n * mean * mean) / (n - 1.0));
        est.times.push_back(k * dt);
        est.p_hat.push_back(mean);
        est.ci_half_width.push_back(z99 * std::sqrt(var / n));
        est.p_strict.push_back(static_cast<double>(alive_strict_cnt[k]) / n);
        est.p_nonstrict.push_back(static_cast<double>(alive_nonstrict_cnt[k]) / n);
    }
    return est;
}

}  // namespace ifpp
