#pragma once

// Ohmic dephasing bath: coherence factor mu(t), the purification coupling
// h(t), the bath correlation kernel and the drift Hamiltonian of the
// purified qubit.  Natural units hbar = 1, gate time tau = 1.

#include <complex>
#include <vector>

#include "cdd/algebra.hpp"

namespace cdd {

struct NoiseParams {
  double eta = 0.34;                       // dimensionless coupling
  double omega_c = 0.6283185307179586;     // cutoff, pi / (5 tau)
  double omega_T = 0.6283185307179586;     // k_B T / hbar
  double tau = 1.0;

  /// Gate-protection regime with the thermal frequency defaulted to the cutoff.
  static NoiseParams gate_defaults() { return {}; }
  static NoiseParams noiseless() { return {0.0, 0.6283185307179586, 0.6283185307179586, 1.0}; }

  double correlation_time() const;  // 2 pi / omega_c
  void validate() const;            // throws std::invalid_argument
};

double log_mu(double t, const NoiseParams& p);
double mu(double t, const NoiseParams& p);
double mu_dot(double t, const NoiseParams& p);

/// h(t) = mu_dot / (2 sqrt(1 - mu^2)), with h(0) = -sqrt(lambda0).
double h_of_t(double t, const NoiseParams& p);

/// Bath correlation C(t), including the eta omega_c^2 prefactor.
std::complex<double> correlation(double t, const NoiseParams& p);

/// C(t) / C(0); defined for any parameters with C(0) != 0.
std::complex<double> correlation_ratio(double t, const NoiseParams& p);

/// lambda0 = eta omega_c^2 + 2 eta omega_T^2 psi'(1 + omega_T/omega_c) = C(0).
double lambda0(const NoiseParams& p);

/// H_D(t) = -h(t) sigma_z ⊗ sigma_z.
Mat4 drift_hamiltonian(double t, const NoiseParams& p);

/// Uniform grid on [0, tau] with mu, h and the correlation kernel sampled at
/// every node and lag.  Shared read-only by integrators.
class NoiseTable {
 public:
  NoiseTable(const NoiseParams& p, int n_steps);

  const NoiseParams& params() const { return params_; }
  int steps() const { return n_; }
  double dt() const { return dt_; }
  double time(int i) const { return i * dt_; }

  double h_at(int i) const { return h_[static_cast<std::size_t>(i)]; }
  double mu_at(int i) const { return mu_[static_cast<std::size_t>(i)]; }
  /// C(k dt) for lag index k in [0, n].
  std::complex<double> correlation_lag(int k) const { return corr_[static_cast<std::size_t>(k)]; }

  /// Piecewise-linear h between nodes.
  double h(double t) const;

  const std::vector<double>& h_values() const { return h_; }
  const std::vector<double>& mu_values() const { return mu_; }

 private:
  NoiseParams params_;
  int n_;
  double dt_;
  std::vector<double> mu_, h_;
  std::vector<std::complex<double>> corr_;
};

}  // namespace cdd
