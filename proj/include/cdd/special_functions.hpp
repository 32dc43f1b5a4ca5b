#pragma once

#include <complex>

namespace cdd::special {

/// log Gamma(z).  Lanczos (g = 7, 9 terms) for Re z >= 1/2, reflection below.
/// The real part is exact to rounding; the imaginary part is some branch of
/// arg Gamma(z) and should not be compared across the cut.
std::complex<double> log_gamma(std::complex<double> z);

/// psi(z) = d/dz log Gamma(z).  Upward recurrence to |z| >= 10, then the
/// asymptotic series; reflection for Re z < 1/2.
std::complex<double> digamma(std::complex<double> z);

/// psi'(z).  Same scheme as digamma.
std::complex<double> trigamma(std::complex<double> z);

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

}  // namespace cdd::special
