#include "cdd/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace cdd::special {

namespace {

using cplx = std::complex<double>;

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos{
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr double kAsymptoticRadius = 10.0;

cplx log_gamma_right(cplx z) {
  z -= 1.0;
  cplx x = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) x += kLanczos[i] / (z + static_cast<double>(i));
  const cplx t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// psi(z) ~ ln z - 1/2z - sum B_2k / (2k z^2k)
cplx digamma_asymptotic(cplx z) {
  const cplx w = 1.0 / (z * z);
  // B_2k / 2k for k = 1..7
  constexpr std::array<double, 7> c{1.0 / 12,  -1.0 / 120,      1.0 / 252, -1.0 / 240,
                                    1.0 / 132, -691.0 / 32760, 1.0 / 12};
  cplx series = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) series = (series + *it) * w;
  return std::log(z) - 0.5 / z - series;
}

// psi'(z) ~ 1/z + 1/2z^2 + sum B_2k / z^(2k+1)
cplx trigamma_asymptotic(cplx z) {
  const cplx w = 1.0 / (z * z);
  constexpr std::array<double, 7> b{1.0 / 6,  -1.0 / 30,       1.0 / 42, -1.0 / 30,
                                    5.0 / 66, -691.0 / 2730, 7.0 / 6};
  cplx series = 0.0;
  for (auto it = b.rbegin(); it != b.rend(); ++it) series = (series + *it) * w;
  return 1.0 / z + 0.5 * w + series / z;
}

}  // namespace

cplx log_gamma(cplx z) {
  if (z.real() < 0.5) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(std::numbers::pi) - std::log(std::sin(std::numbers::pi * z)) - log_gamma_right(1.0 - z);
  }
  return log_gamma_right(z);
}

cplx digamma(cplx z) {
  if (z.real() < 0.5) {
    return digamma(1.0 - z) - std::numbers::pi / std::tan(std::numbers::pi * z);
  }
  cplx acc = 0.0;
  while (std::abs(z) < kAsymptoticRadius) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  return acc + digamma_asymptotic(z);
}

cplx trigamma(cplx z) {
  if (z.real() < 0.5) {
    const cplx s = std::sin(std::numbers::pi * z);
    return std::numbers::pi * std::numbers::pi / (s * s) - trigamma(1.0 - z);
  }
  cplx acc = 0.0;
  while (std::abs(z) < kAsymptoticRadius) {
    acc += 1.0 / (z * z);
    z += 1.0;
  }
  return acc + trigamma_asymptotic(z);
}

}  // namespace cdd::special
