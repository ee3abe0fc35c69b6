#include "ifpp/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ifpp {

namespace {

void check_knots(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.empty() || t.size() != v.size()) {
        throw std::invalid_argument("boundary: knot arrays empty or mismatched");
    }
    for (size_t i = 0; i + 1 < t.size(); ++i) {
        if (!(t[i] < t[i + 1])) throw std::invalid_argument("boundary: knots must strictly increase");
    }
    for (double x : t) {
        if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("boundary: bad knot time");
    }
    for (double x : v) {
        if (std::isnan(x) || x == kPosInf) throw std::invalid_argument("boundary: values must be in [-inf, inf)");
    }
}

}  // namespace

Boundary Boundary::constant(double level, double horizon) {
    Boundary b;
    b.interp_ = BoundaryInterp::constant;
    b.const_value_ = level;
    b.horizon_ = horizon;
    if (!(horizon > 0.0)) throw std::invalid_argument("boundary: horizon must be positive");
    if (std::isnan(level) || level == kPosInf) throw std::invalid_argument("boundary: bad level");
    return b;
}

Boundary Boundary::neg_infinity(double horizon) { return constant(kNegInf, horizon); }

Boundary Boundary::piecewise_linear(std::vector<double> t, std::vector<double> v, double horizon) {
    check_knots(t, v);
    if (!(horizon > 0.0)) throw std::invalid_argument("boundary: horizon must be positive");
    Boundary b;
    b.interp_ = BoundaryInterp::piecewise_linear;
    b.t_ = std::move(t);
    b.v_ = std::move(v);
    b.horizon_ = horizon;
    return b;
}

Boundary Boundary::piecewise_constant(std::vector<double> t, std::vector<double> v, double horizon) {
    check_knots(t, v);
    if (!(horizon > 0.0)) throw std::invalid_argument("boundary: horizon must be positive");
    Boundary b;
    b.interp_ = BoundaryInterp::piecewise_constant;
    b.t_ = std::move(t);
    b.v_ = std::move(v);
    b.horizon_ = horizon;
    return b;
}

Boundary Boundary::from_callable(std::function<double(double)> f, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("boundary: horizon must be positive");
    Boundary b;
    b.interp_ = BoundaryInterp::callable;
    b.fn_ = std::move(f);
    b.horizon_ = horizon;
    return b;
}

double Boundary::eval_pwl(double t) const {
    if (t <= t_.front()) return v_.front();
    if (t >= t_.back()) return v_.back();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t i = static_cast<size_t>(it - t_.begin()) - 1;  // t in [t_i, t_{i+1})
    if (t == t_[i]) return v_[i];
    double va = v_[i], vb = v_[i + 1];
    if (va == kNegInf || vb == kNegInf) return kNegInf;
    double f = (t - t_[i]) / (t_[i + 1] - t_[i]);
    return va + f * (vb - va);
}

double Boundary::eval_pwc(double t) const {
    if (t < t_.front()) return v_.front();
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    size_t i = static_cast<size_t>(it - t_.begin());
    return v_[i == 0 ? 0 : i - 1];
}

double Boundary::value(double t) const {
    if (!(t > 0.0 && t <= horizon_ * (1.0 + 1e-12))) {
        throw std::domain_error("boundary: t outside (0, horizon]");
    }
    switch (interp_) {
        case BoundaryInterp::constant: return const_value_;
        case BoundaryInterp::piecewise_linear: return eval_pwl(t);
        case BoundaryInterp::piecewise_constant: return eval_pwc(t);
        case BoundaryInterp::callable: return fn_(t);
    }
    return kNegInf;
}

double Boundary::left_limit(double t) const {
    switch (interp_) {
        case BoundaryInterp::constant: return const_value_;
        case BoundaryInterp::piecewise_linear: {
            if (t <= t_.front()) return v_.front();
            if (t > t_.back()) return v_.back();
            auto it = std::lower_bound(t_.begin(), t_.end(), t);
            size_t i = static_cast<size_t>(it - t_.begin());  // segment (t_{i-1}, t_i) holds t
            double va = v_[i - 1], vb = v_[i];
            if (va == kNegInf || vb == kNegInf) return kNegInf;
            double f = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
            return va + f * (vb - va);
        }
        case BoundaryInterp::piecewise_constant: {
            if (t <= t_.front()) return v_.front();
            auto it = std::lower_bound(t_.begin(), t_.end(), t);
            size_t i = static_cast<size_t>(it - t_.begin());
            return v_[i - 1];  // previous plateau, also at jump times
        }
        case BoundaryInterp::callable: {
            double best = kNegInf;
            double h = std::max(1e-3 * horizon_, 1e-9);
            for (int j = 0; j < 30; ++j) {
                double s = t - h;
                if (s > 0.0) best = std::max(best, fn_(s));
                h *= 0.25;
            }
            return best;
        }
    }
    return kNegInf;
}

double Boundary::right_limit(double t) const {
    switch (interp_) {
        case BoundaryInterp::constant: return const_value_;
        case BoundaryInterp::piecewise_linear: {
            if (t < t_.front()) return v_.front();
            if (t >= t_.back()) return v_.back();
            auto it = std::upper_bound(t_.begin(), t_.end(), t);
            size_t i = static_cast<size_t>(it - t_.begin());  // segment (t, t_i)
            double va = v_[i - 1], vb = v_[i];
            if (va == kNegInf || vb == kNegInf) return kNegInf;
            double f = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
            return va + f * (vb - va);
        }
        case BoundaryInterp::piecewise_constant: {
            if (t < t_.front()) return v_.front();
            auto it = std::upper_bound(t_.begin(), t_.end(), t);
            size_t i = static_cast<size_t>(it - t_.begin());
            return v_[i == 0 ? 0 : i - 1];
        }
        case BoundaryInterp::callable: {
            double best = kNegInf;
            double h = std::max(1e-3 * horizon_, 1e-9);
            for (int j = 0; j < 30; ++j) {
                double s = t + h;
                if (s <= horizon_) best = std::max(best, fn_(s));
                h *= 0.25;
            }
            return best;
        }
    }
    return kNegInf;
}

bool Boundary::is_neg_inf_everywhere() const {
    switch (interp_) {
        case BoundaryInterp::constant: return const_value_ == kNegInf;
        case BoundaryInterp::piecewise_linear:
        case BoundaryInterp::piecewise_constant:
            return std::all_of(v_.begin(), v_.end(), [](double x) { return x == kNegInf; });
        case BoundaryInterp::callable: {
            for (int j = 1; j <= 256; ++j) {
                if (fn_(horizon_ * j / 256.0) != kNegInf) return false;
            }
            return true;
        }
    }
    return false;
}

double Boundary::finite_infimum() const {
    double m = kPosInf;
    switch (interp_) {
        case BoundaryInterp::constant:
            return const_value_ == kNegInf ? kPosInf : const_value_;
        case BoundaryInterp::piecewise_linear:
        case BoundaryInterp::piecewise_constant:
            for (double x : v_) {
                if (x != kNegInf) m = std::min(m, x);
            }
            return m;
        case BoundaryInterp::callable:
            for (int j = 1; j <= 1024; ++j) {
                double x = fn_(horizon_ * j / 1024.0);
                if (x != kNegInf) m = std::min(m, x);
            }
            return m;
    }
    return m;
}

double Boundary::finite_supremum() const {
    double m = kNegInf;
    switch (interp_) {
        case BoundaryInterp::constant: return const_value_;
        case BoundaryInterp::piecewise_linear:
        case BoundaryInterp::piecewise_constant:
            for (double x : v_) m = std::max(m, x);
            return m;
        case BoundaryInterp::callable:
            for (int j = 1; j <= 1024; ++j) m = std::max(m, fn_(horizon_ * j / 1024.0));
            return m;
    }
    return m;
}

double Boundary::supremum(double a, double c) const {
    double lo = std::max(a, 0.0), hi = std::min(c, horizon_);
    if (!(hi > 0.0) || hi < lo) throw std::domain_error("boundary supremum: empty window");
    if (interp_ == BoundaryInterp::constant) return const_value_;
    if (interp_ == BoundaryInterp::callable) {
        throw std::logic_error("boundary supremum: resample callable boundaries first");
    }
    // Candidates: window ends and knots inside; at each, the point value and
    // the limit from the right (covers plateau/segment interiors exactly).
    double s = kNegInf;
    auto consider = [&](double p) {
        if (p > 0.0) s = std::max(s, value(p));
        if (p < hi) s = std::max(s, right_limit(p));
    };
    consider(lo);
    auto it = std::upper_bound(t_.begin(), t_.end(), lo);
    for (; it != t_.end() && *it <= hi; ++it) consider(*it);
    consider(hi);
    return s;
}

double usc_envelope(const Boundary& b, double t) {
    if (!(t > 0.0 && t <= b.horizon_ * (1.0 + 1e-12))) {
        throw std::domain_error("usc_envelope: t outside (0, horizon]");
    }
    double v = b.value(t);
    double l = b.left_limit(t);
    double r = t < b.horizon_ ? b.right_limit(t) : kNegInf;
    return std::max({v, l, r});
}

double left_limsup(const Boundary& b, double t) {
    if (!(t > 0.0 && t <= b.horizon_ * (1.0 + 1e-12))) {
        throw std::domain_error("left_limsup: t outside (0, horizon]");
    }
    return b.left_limit(t);
}

double usc_envelope_at_zero(const Boundary& b) {
    switch (b.interp_) {
        case BoundaryInterp::constant: return b.const_value_;
        case BoundaryInterp::piecewise_linear: {
            if (b.t_.front() > 0.0) return b.v_.front();
            if (b.v_.size() == 1) return b.v_.front();
            return (b.v_[0] == kNegInf || b.v_[1] == kNegInf) ? kNegInf : b.v_[0];
        }
        case BoundaryInterp::piecewise_constant: return b.v_.front();
        case BoundaryInterp::callable: {
            double best = kNegInf;
            double h = std::max(1e-3 * b.horizon_, 1e-9);
            for (int j = 0; j < 30; ++j) {
                best = std::max(best, b.fn_(h));
                h *= 0.25;
            }
            return best;
        }
    }
    return kNegInf;
}

Boundary Boundary::resampled_dyadic(int level) const {
    if (interp_ != BoundaryInterp::callable) return *this;
    double w = std::ldexp(1.0, -level);
    std::vector<double> t, v;
    for (double s = w; s < horizon_; s += w) {
        t.push_back(s);
        v.push_back(fn_(s));
    }
    if (t.empty() || t.back() < horizon_) {
        t.push_back(horizon_);
        v.push_back(fn_(horizon_));
    }
    return piecewise_linear(std::move(t), std::move(v), horizon_);
}

LandmarkSet landmarks(const Boundary& boundary, int level) {
    if (level < 0) throw std::invalid_argument("landmarks: level must be nonnegative");
    // Cell suprema are exact only for knot-based representations; callables
    // are first sampled onto a finer dyadic grid.
    const Boundary b = boundary.interp() == BoundaryInterp::callable
                           ? boundary.resampled_dyadic(level + 4)
                           : boundary;
    LandmarkSet lm;
    lm.level = level;
    lm.width = std::ldexp(1.0, -level);
    const double T = b.horizon();

    auto envelope_at = [&](double t) {
        return t == 0.0 ? usc_envelope_at_zero(b) : usc_envelope(b, t);
    };

    for (int64_t i = 0;; ++i) {
        double a = static_cast<double>(i) * lm.width;
        if (a >= T) break;
        double c = std::min(static_cast<double>(i + 1) * lm.width, T);
        double s = b.supremum(a, c);

        // First event point (cell end or knot) whose envelope attains the cell
        // supremum; attainment at an event is guaranteed for piecewise reps.
        double point = c;
        bool found = false;
        if (envelope_at(a) >= s) {
            point = a;
            found = true;
        }
        if (!found && b.interp() != BoundaryInterp::constant) {
            const auto& kt = b.knot_times();
            auto it = std::upper_bound(kt.begin(), kt.end(), a);
            for (; it != kt.end() && *it < c; ++it) {
                if (envelope_at(*it) >= s) {
                    point = *it;
                    found = true;
                    break;
                }
            }
        }
        if (!found) point = c;
        lm.points.push_back({i, point, envelope_at(point)});
    }
    return lm;
}

}  // namespace ifpp
