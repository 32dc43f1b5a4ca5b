#pragma once

// Boundary-value solver for the purified-qubit geodesic flow
//
//   i dU/dt = { H_D(t) + F_q[ U Lambda(0) U^dagger ] } U,   U(0) = I,
//
// with F_q = P + Q/q for the penalised (Riemannian) metric and F_q -> P in the
// sub-Riemannian limit.  The unknown is the costate Lambda(0) in span(gamma);
// U(tau) must reach target ⊗ I.
//
// The group generated by span(gamma) is block diagonal in the ancilla
// sigma_z basis, U = V+ ⊗ |0><0| + V- ⊗ |1><1|, so the flow is integrated as
// a pair of 2x2 unitaries and only expanded to 4x4 on output.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cdd/algebra.hpp"
#include "cdd/control_field.hpp"
#include "cdd/minimize.hpp"
#include "cdd/noise.hpp"

namespace cdd {

/// q value that selects the sub-Riemannian (q -> infinity) flow.
inline constexpr double kSubRiemannian = std::numeric_limits<double>::infinity();

struct SplitUnitary {
  Mat2 plus = Mat2::Identity();
  Mat2 minus = Mat2::Identity();

  Mat4 full() const;
  static SplitUnitary from_full(const Mat4& u);
};

/// Infidelity of U against target ⊗ I without forming 4x4 matrices.
double split_infidelity(const SplitUnitary& u, const Mat2& target);

struct GeodesicSolution {
  GammaVector costate0;
  double q = kSubRiemannian;
  std::vector<double> t;
  std::vector<SplitUnitary> trajectory;
  /// P-part of U Lambda(0) U^dagger at each node, i.e. the control field.
  ControlField control;
  /// Against the target passed to the propagator; NaN when none was given.
  double achieved_infidelity = std::numeric_limits<double>::quiet_NaN();
  /// Largest |U^dagger U - I| seen before re-unitarisation.
  double max_unitarity_drift = 0.0;
  bool unitarity_blowup = false;

  const SplitUnitary& final_unitary() const { return trajectory.back(); }
  bool sub_riemannian() const { return q == kSubRiemannian; }
};

/// Drift above this (before the per-step projection) is flagged as blowup.
inline constexpr double kUnitarityBlowup = 1e-8;

/// Fixed-step RK4 with polar re-unitarisation after every step.  q must be
/// positive; pass kSubRiemannian for the P-flow.
GeodesicSolution propagate_q(const GammaVector& costate0, double q, const NoiseTable& noise,
                             const Mat2* target = nullptr);
GeodesicSolution propagate_sub(const GammaVector& costate0, const NoiseTable& noise,
                               const Mat2* target = nullptr);

/// Endpoint only, no trajectory storage.  Used inside the optimisers.
SplitUnitary flow_endpoint(const GammaVector& costate0, double q, const NoiseTable& noise,
                           double* max_drift = nullptr);
double endpoint_infidelity(const GammaVector& costate0, double q, const NoiseTable& noise,
                           const Mat2& target);

/// H_guess = i log(target) as (u, 0, 0, q h(0)): the distribution part is
/// read from the principal logarithm, the sigma_z ⊗ sigma_z entry cancels
/// the drift at t = 0 through F_q.  Targets on the branch cut are rotated by
/// 1e-8 about z first.
GammaVector initial_guess(const Mat2& target, double q, const NoiseParams& p);

struct InfidelityMinimization {
  GammaVector costate;
  double infidelity = 1.0;
  MinimizeResult details;
};

InfidelityMinimization minimize_infidelity(const GammaVector& seed, const Mat2& target, double q,
                                           const NoiseTable& noise, const MinimizeOptions& opt = {});

enum class ShootStatus { Converged, Improved, Diverged, BranchCut };
std::string to_string(ShootStatus s);

struct ShootOptions {
  int max_iterations = 8;
  double fd_step = 1e-6;
  double residual_tol = 1e-12;
  /// Stop early once the infidelity drops below this.
  double infidelity_tol = 1e-12;
};

struct ShootResult {
  GammaVector costate;
  double infidelity = 1.0;
  double residual_norm = 0.0;
  int iterations = 0;
  ShootStatus status = ShootStatus::Converged;
};

/// Gamma coordinates of i log(E), E = (target ⊗ I)^dagger U(tau) with the
/// sign of E chosen so that Re Tr E >= 0.  Throws BranchCutError.
GammaVector shooting_residual(const SplitUnitary& u, const Mat2& target);

/// Newton iteration on shooting_residual with a forward-difference
/// Jacobian.  Only improvements in infidelity are accepted; on divergence the
/// input costate is returned unchanged.
ShootResult shoot_newton(const GammaVector& costate, const Mat2& target, double q, const NoiseTable& noise,
                         const ShootOptions& opt = {});

struct JumpSchedule {
  double q_in = 10.0;
  double q_max = 2000.0;
  int n_it = 100;

  /// 10^chi with chi = log10(q_max / q_in) / n_it.
  double factor() const;
  double chi() const;
  void validate() const;  // throws std::invalid_argument
};

struct JumpRecord {
  double q = 0.0;
  double infidelity = 0.0;
  int retries = 0;
  bool within_tol = false;
};

enum class QJumpStatus { Converged, Exhausted };
std::string to_string(QJumpStatus s);

struct QJumpOptions {
  double tol = 1e-4;
  int max_halvings = 3;
  MinimizeOptions minimize{};
  ShootOptions shoot{};
  /// Run the final q -> infinity pass.
  bool finish_sub_riemannian = true;
  /// Continue from this costate at q_in instead of initial_guess.
  std::optional<GammaVector> seed;
};

struct QJumpResult {
  GeodesicSolution solution;           // final flow (sub-Riemannian when finished)
  GammaVector penalised_costate;       // Lambda at the last finite q
  double q_reached = 0.0;
  double penalised_infidelity = 1.0;
  std::vector<JumpRecord> history;
  QJumpStatus status = QJumpStatus::Converged;
};

/// q-jumping homotopy.  Never throws on a hard target: returns the best
/// solution found with status Exhausted.
QJumpResult q_jump(const Mat2& target, const NoiseTable& noise, const JumpSchedule& schedule,
                   const QJumpOptions& opt = {});

/// omega_k(t) = gamma components 1..3 of P[U Lambda(0) U^dagger].
ControlField extract_control(const GeodesicSolution& sol);

/// Minimise then, if still above tol, shoot.  Shared by q_jump and the
/// surrogate refinement.
struct RefineResult {
  GammaVector costate;
  double infidelity = 1.0;
};
RefineResult refine_costate(const GammaVector& seed, const Mat2& target, double q, const NoiseTable& noise,
                            double tol, const MinimizeOptions& mopt = {}, const ShootOptions& sopt = {},
                            bool always_shoot = false);

}  // namespace cdd
