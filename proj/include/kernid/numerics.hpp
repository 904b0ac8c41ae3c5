#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace kernid {

/// Trapezoidal convolution on a uniform grid:
///   out[i] = h * (a[i]*b[0]/2 + sum_{k=1..i-1} a[i-k]*b[k] + a[0]*b[i]/2),
/// i.e. the quadrature of integral a(t-s) b(s) ds over [0, t_i]; out[0] = 0.
std::vector<double> conv_trapezoid(const std::vector<double>& a,
                                   const std::vector<double>& b, double h);

/// Running integral by the composite trapezoid rule; out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& v, double h);

/// 2pi-periodic odd sawtooth, equal to x/2 on (-pi, pi).
inline double sawtooth(double x) { return 0.5 * std::remainder(x, 2.0 * M_PI); }

/// 2pi-periodic even parabola, equal to x^2/4 - pi^2/12 on [-pi, pi].
/// (The alternating cosine series summed in closed form.)
inline double parabola_series(double x) {
    const double r = std::remainder(x, 2.0 * M_PI);
    return 0.25 * r * r - M_PI * M_PI / 12.0;
}

} // namespace kernid
