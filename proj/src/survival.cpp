#include "ifpp/survival.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ifpp {

SurvivalCurve SurvivalCurve::from_samples(std::vector<double> t, std::vector<double> p,
                                          CurveInterp interp) {
    if (t.size() != p.size()) throw std::invalid_argument("survival curve: size mismatch");
    if (t.empty()) throw std::invalid_argument("survival curve: empty input");
    if (t.front() != 0.0) throw std::invalid_argument("survival curve: first sample must be t=0");
    for (size_t i = 0; i + 1 < t.size(); ++i) {
        if (!(t[i] < t[i + 1])) throw std::invalid_argument("survival curve: times must increase");
    }
    SurvivalCurve c;
    c.t_ = std::move(t);
    c.p_ = std::move(p);
    c.interp_ = interp;
    return c;
}

double SurvivalCurve::value(double t) const {
    if (t_.empty()) throw std::logic_error("survival curve: empty");
    if (exponential_rate) return std::exp(-(*exponential_rate) * std::min(t, t_.back()));
    if (t <= t_.front()) return p_.front();
    if (t >= t_.back()) return p_.back();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t i = static_cast<size_t>(it - t_.begin()) - 1;
    double f = (t - t_[i]) / (t_[i + 1] - t_[i]);
    if (interp_ == CurveInterp::log_linear && p_[i] > 0.0 && p_[i + 1] > 0.0) {
        return std::exp((1.0 - f) * std::log(p_[i]) + f * std::log(p_[i + 1]));
    }
    return p_[i] + f * (p_[i + 1] - p_[i]);
}

SurvivalCurve SurvivalCurve::truncated(double new_horizon) const {
    if (new_horizon >= horizon()) return *this;
    if (!(new_horizon > 0.0)) throw std::invalid_argument("truncate: horizon must be positive");
    std::vector<double> t, p;
    for (size_t i = 0; i < t_.size() && t_[i] < new_horizon; ++i) {
        t.push_back(t_[i]);
        p.push_back(p_[i]);
    }
    t.push_back(new_horizon);
    p.push_back(value(new_horizon));
    auto c = from_samples(std::move(t), std::move(p), interp_);
    c.exponential_rate = exponential_rate;
    return c;
}

P0Report validate_p0(const SurvivalCurve& p) {
    if (p.size() < 2) throw std::invalid_argument("validate_p0: need at least two samples");
    P0Report r;
    const auto& ts = p.times();
    const auto& ps = p.values();
    if (std::abs(ps.front() - 1.0) > 1e-12) {
        r.valid = false;
        r.violations.push_back("p(0) != 1");
        r.indices.push_back(0);
    }
    for (size_t j = 0; j < ps.size(); ++j) {
        if (!(ps[j] > 0.0)) {
            r.valid = false;
            r.violations.push_back("p(" + std::to_string(ts[j]) + ") not strictly positive");
            r.indices.push_back(j);
        }
        if (ps[j] > 1.0 + 1e-12) {
            r.valid = false;
            r.violations.push_back("p(" + std::to_string(ts[j]) + ") exceeds 1");
            r.indices.push_back(j);
        }
        if (j > 0 && ps[j] > ps[j - 1] + 1e-12) {
            r.valid = false;
            r.violations.push_back("increase at t=" + std::to_string(ts[j]));
            r.indices.push_back(j);
        }
    }
    return r;
}

double decrease_rate(const SurvivalCurve& p, double t1, double t2) {
    if (!(t1 >= 0.0 && t1 < t2 && t2 <= p.horizon() * (1.0 + 1e-12))) {
        throw std::domain_error("decrease_rate: need 0 <= T1 < T2 <= horizon");
    }
    // inf of difference quotients == essential inf of -p' for the interpolants
    // we support; both reduce to a minimum over (clipped) segments.
    if (p.exponential_rate) {
        // -p' = lambda e^{-lambda t}, smallest at the right end of the window
        return *p.exponential_rate * p.value(t2);
    }
    const auto& ts = p.times();
    const auto& ps = p.values();
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        double a = std::max(ts[i], t1), b = std::min(ts[i + 1], t2);
        if (!(a < b)) continue;
        if (p.interp() == CurveInterp::log_linear && ps[i] > 0.0 && ps[i + 1] > 0.0) {
            // -p' = lambda_seg * p, smallest at the right end of the clipped piece
            double lam = (std::log(ps[i]) - std::log(ps[i + 1])) / (ts[i + 1] - ts[i]);
            best = std::min(best, lam * p.value(b));
        } else {
            best = std::min(best, (ps[i] - ps[i + 1]) / (ts[i + 1] - ts[i]));
        }
    }
    if (!std::isfinite(best)) throw std::domain_error("decrease_rate: window contains no segment");
    return best;
}

}  // namespace ifpp
