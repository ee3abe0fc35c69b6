#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace ifpp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Standard normal CDF via erfc; relative error below 1e-14 on the whole line.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

/// Inverse standard normal CDF (Acklam's rational approximation plus one
/// Halley refinement through erfc), accurate to ~1e-15 for u in (0,1).
double normal_quantile(double u);

/// Trapezoid rule on a uniform grid.
double trapezoid(std::span<const double> y, double dx);

/// out[k] = integral from x_k to x_max (suffix trapezoid). out must not alias y.
void suffix_trapezoid(std::span<const double> y, double dx, std::span<double> out);

/// out[k] = integral from x_min to x_k (prefix trapezoid).
void prefix_trapezoid(std::span<const double> y, double dx, std::span<double> out);

/// FNV-1a 64-bit hash, used to fingerprint configs in reports.
uint64_t fnv1a64(std::string_view s);

/// Least-squares slope of log2(err) against -log2(h); used by convergence tests.
double fitted_order(std::span<const double> h, std::span<const double> err);

}  // namespace ifpp
