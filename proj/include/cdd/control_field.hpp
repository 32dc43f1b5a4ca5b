#pragma once

#include <cstddef>
#include <vector>

#include "cdd/algebra.hpp"

namespace cdd {

/// Control amplitudes (omega_x, omega_y, omega_z)(t) sampled on a uniform
/// grid, H_c(t) = omega . sigma with hbar = 1.
struct ControlField {
  std::vector<double> t, wx, wy, wz;

  static ControlField zero(int n_steps, double tau = 1.0);
  static ControlField constant(const Vec3& w, int n_steps, double tau = 1.0);

  std::size_t size() const { return t.size(); }
  int steps() const { return static_cast<int>(t.size()) - 1; }
  double dt() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
  double duration() const { return t.empty() ? 0.0 : t.back(); }

  Vec3 node(std::size_t i) const { return {wx[i], wy[i], wz[i]}; }
  /// Linear interpolation between nodes; clamps outside [0, duration].
  Vec3 at(double time) const;
  Mat2 hamiltonian(std::size_t i) const { return from_pauli(node(i)); }

  /// Throws std::invalid_argument unless the grid is uniform, strictly
  /// increasing and all component arrays have the grid's length.
  void validate() const;
};

}  // namespace cdd
