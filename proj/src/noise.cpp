#include "cdd/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cdd/special_functions.hpp"

namespace cdd {

using special::digamma;
using special::log_gamma;
using special::trigamma;

double NoiseParams::correlation_time() const { return 2.0 * std::numbers::pi / omega_c; }

void NoiseParams::validate() const {
  if (!(omega_c > 0)) throw std::invalid_argument("noise: omega_c must be positive");
  if (!(eta >= 0)) throw std::invalid_argument("noise: eta must be non-negative");
  if (!(omega_T >= 0)) throw std::invalid_argument("noise: omega_T must be non-negative");
  if (!(tau > 0)) throw std::invalid_argument("noise: tau must be positive");
}

double log_mu(double t, const NoiseParams& p) {
  if (p.eta == 0.0 || t == 0.0) return 0.0;
  const double a = p.omega_T / p.omega_c;
  const double b = p.omega_T;
  double thermal = 0.0;
  if (b != 0.0) {
    thermal = 4.0 * (log_gamma({1.0 + a, b * t}).real() - log_gamma({1.0 + a, 0.0}).real());
  }
  const double wct = p.omega_c * t;
  return 2.0 * p.eta * (thermal - std::log1p(wct * wct));
}

double mu(double t, const NoiseParams& p) { return std::exp(log_mu(t, p)); }

double mu_dot(double t, const NoiseParams& p) {
  if (p.eta == 0.0 || t == 0.0) return 0.0;
  const double a = p.omega_T / p.omega_c;
  const double b = p.omega_T;
  const double wc2 = p.omega_c * p.omega_c;
  double thermal = 0.0;
  if (b != 0.0) thermal = 4.0 * b * (std::complex<double>(0.0, 1.0) * digamma({1.0 + a, b * t})).real();
  return mu(t, p) * 2.0 * p.eta * (thermal - 2.0 * wc2 * t / (1.0 + wc2 * t * t));
}

double lambda0(const NoiseParams& p) {
  const double a = p.omega_T / p.omega_c;
  double l = p.eta * p.omega_c * p.omega_c;
  if (p.omega_T != 0.0) l += 2.0 * p.eta * p.omega_T * p.omega_T * trigamma({1.0 + a, 0.0}).real();
  return l;
}

double h_of_t(double t, const NoiseParams& p) {
  if (p.eta == 0.0) return 0.0;
  const double limit = -std::sqrt(lambda0(p));
  if (t == 0.0) return limit;
  const double one_minus_mu2 = -std::expm1(2.0 * log_mu(t, p));
  if (!(one_minus_mu2 > 0)) return limit;
  return mu_dot(t, p) / (2.0 * std::sqrt(one_minus_mu2));
}

std::complex<double> correlation(double t, const NoiseParams& p) {
  const double a = p.omega_T / p.omega_c;
  const std::complex<double> d(1.0, p.omega_c * t);
  std::complex<double> val = 1.0 / (d * d);
  if (a != 0.0) val += 2.0 * a * a * trigamma({1.0 + a, -a * p.omega_c * t}).real();
  return p.eta * p.omega_c * p.omega_c * val;
}

std::complex<double> correlation_ratio(double t, const NoiseParams& p) {
  NoiseParams unit = p;
  unit.eta = 1.0;
  return correlation(t, unit) / correlation(0.0, unit);
}

Mat4 drift_hamiltonian(double t, const NoiseParams& p) {
  return -h_of_t(t, p) * kron(pauli(2), pauli(2));
}

NoiseTable::NoiseTable(const NoiseParams& p, int n_steps) : params_(p), n_(n_steps) {
  p.validate();
  if (n_steps < 1) throw std::invalid_argument("NoiseTable: need at least one step");
  dt_ = p.tau / n_steps;
  const auto n = static_cast<std::size_t>(n_steps) + 1;
  mu_.resize(n);
  h_.resize(n);
  corr_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt_;
    mu_[i] = mu(t, p);
    h_[i] = h_of_t(t, p);
    corr_[i] = correlation(t, p);
  }
}

double NoiseTable::h(double t) const {
  const double x = t / dt_;
  if (x <= 0) return h_.front();
  if (x >= n_) return h_.back();
  const auto i = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * h_[i] + f * h_[i + 1];
}

}  // namespace cdd
