#pragma once

// Gate synthesis on top of the geodesic solver.  The boundary-value problem
// has many solutions (one per geodesic family), so several deterministic
// starts are run and one converged candidate is chosen: the cheapest whose
// dephasing fidelity on |+> clears a floor, else the most protective one.

#include <cstdint>
#include <optional>
#include <vector>

#include "cdd/geodesic.hpp"

namespace cdd {

struct SynthesisSettings {
  int grid_n = 1000;
  JumpSchedule schedule{10.0, 2000.0, 100};
  double tol = 1e-4;
  int starts = 8;
  /// Standard deviation of the Gaussian offset added to initial_guess for
  /// starts after the first.
  double start_spread = 4.0;
  std::uint64_t seed = 1;
  /// Screening floor on F(tau) for rho0 = |+><+|; <= 0 picks the cheapest.
  double fidelity_floor = 0.99;
  unsigned jobs = 1;
  /// Extra start refined directly on the sub-Riemannian flow (surrogate
  /// prediction).
  std::optional<GammaVector> predicted;
};

struct SynthesisCandidate {
  int start = 0;  // -1 for the predicted costate
  GammaVector costate;
  double infidelity = 1.0;
  double energy = 0.0;
  double fidelity = 0.0;
};

struct SynthesisResult {
  GeodesicSolution solution;
  std::vector<SynthesisCandidate> candidates;
  std::size_t chosen = 0;
  bool within_tol = false;
};

SynthesisResult synthesize(const Mat2& target, const NoiseParams& p, const SynthesisSettings& s);

/// Index of the candidate the screening rule selects among those with
/// infidelity <= tol (all candidates if none qualify).
std::size_t select_candidate(const std::vector<SynthesisCandidate>& c, double tol, double fidelity_floor);

}  // namespace cdd
