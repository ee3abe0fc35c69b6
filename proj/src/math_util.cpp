#include "ifpp/math_util.hpp"

#include <stdexcept>

namespace ifpp {

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        if (u == 0.0) return kNegInf;
        if (u == 1.0) return kPosInf;
        throw std::domain_error("normal_quantile: argument outside [0,1]");
    }
    // Acklam's approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // One Halley step against the erfc-based CDF.
    double e = normal_cdf(x) - u;
    double g = normal_pdf(x);
    if (g > 0.0) {
        double t = e / g;
        x -= t / (1.0 + 0.5 * x * t);
    }
    return x;
}

double trapezoid(std::span<const double> y, double dx) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (size_t k = 1; k + 1 < y.size(); ++k) s += y[k];
    return s * dx;
}

void suffix_trapezoid(std::span<const double> y, double dx, std::span<double> out) {
    const size_t n = y.size();
    out[n - 1] = 0.0;
    for (size_t k = n - 1; k-- > 0;) {
        out[k] = out[k + 1] + 0.5 * dx * (y[k] + y[k + 1]);
    }
}

void prefix_trapezoid(std::span<const double> y, double dx, std::span<double> out) {
    out[0] = 0.0;
    for (size_t k = 1; k < y.size(); ++k) {
        out[k] = out[k - 1] + 0.5 * dx * (y[k - 1] + y[k]);
    }
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

double fitted_order(std::span<const double> h, std::span<const double> err) {
    // slope of log(err) vs log(h)
    const size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double x = std::log(h[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ifpp
