#include <cmath>
#include <sstream>

#include "ifpp/boundary.hpp"
#include "ifpp/mc_oracle.hpp"

namespace ifpp {

B0Report check_b0(const Boundary& b, const DiffusionSpec& spec, const InitialDistribution& init,
                  uint64_t seed) {
    B0Report rep;
    const double T = b.horizon();

    // b = b* = b*_- at knots and a dense sample. Knot-based representations are
    // compared at roundoff scale; callables only admit a sampled, coarse check.
    const double tol = b.interp() == BoundaryInterp::callable ? 1e-3 : 1e-12;
    auto same = [&](double a, double v) {
        if (a == kNegInf || v == kNegInf) return a == v;
        return std::abs(a - v) <= tol * std::max(1.0, std::abs(v));
    };
    std::vector<double> probes;
    for (double t : b.knot_times()) {
        if (t > 0.0 && t <= T) probes.push_back(t);
    }
    for (int j = 1; j <= 512; ++j) probes.push_back(T * j / 512.0);
    for (double t : probes) {
        double v = b.value(t);
        if (!same(usc_envelope(b, t), v)) rep.usc_equal = false;
        if (!same(left_limsup(b, t), v)) rep.left_regular = false;
    }
    if (!rep.usc_equal) rep.notes.push_back("b differs from its usc envelope at sampled points");
    if (!rep.left_regular) rep.notes.push_back("b differs from its left limsup at sampled points");

    // start condition: limsup_{t->0} b(t) against the lower edge of X_0
    rep.envelope_at_zero = usc_envelope_at_zero(b);
    rep.support_edge = init.lower_support_edge();
    rep.start_above = rep.envelope_at_zero <= rep.support_edge;
    if (!rep.start_above) {
        rep.notes.push_back("boundary starts above the initial law's lower support edge");
    }

    // Monte Carlo estimate of the crossing mass on (0, eps] for shrinking eps
    for (double eps : {1e-2, 1e-3}) {
        double horiz = std::min(eps, T);
        auto est = estimate_survival(spec, init, b, horiz, 20000, horiz / 100.0, seed, false,
                                     {horiz});
        double mass = 1.0 - est.p_nonstrict.back();
        rep.early_crossing_mass.emplace_back(eps, mass);
        if (mass > 0.05) {
            std::ostringstream os;
            os << "early crossing mass " << mass << " on (0, " << eps
               << "]: start-on-boundary flagged";
            rep.notes.push_back(os.str());
        }
    }

    rep.consistent = rep.usc_equal && rep.left_regular && rep.start_above;
    return rep;
}

}  // namespace ifpp
