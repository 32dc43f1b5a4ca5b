#pragma once

// Open-system checks for synthesized controls.  All density matrices are in
// the interaction picture of the control, rho_I = U_S^dagger rho U_S, so a
// perfectly protected gate leaves rho_I(tau) = rho(0).

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cdd/algebra.hpp"
#include "cdd/control_field.hpp"
#include "cdd/noise.hpp"

namespace cdd {

struct DensityTrajectory {
  std::vector<double> t;
  std::vector<Mat2> rho;
  /// Largest |Tr rho - 1| over the run.
  double max_trace_drift = 0.0;

  const Mat2& final_state() const { return rho.back(); }
};

struct PropagatorTrajectory {
  std::vector<Mat2> u;
  double max_unitarity_drift = 0.0;
  bool unitarity_blowup = false;
};

/// i dU_S/dt = H_c(t) U_S with RK4 and per-step polar correction.
PropagatorTrajectory schrodinger_Us(const ControlField& field);

/// S(t) = U_S^dagger c U_S for each node.
std::vector<Mat2> coupling_in_interaction_picture(const PropagatorTrajectory& us, const Mat2& coupling);

/// Second-order time-convolutionless equation
///   d rho/dt = -int_0^t { C(t - t') [S(t) S(t') rho(t) - S(t') rho(t) S(t)] + h.c. } dt'
/// with the kernel sampled on the field's grid.  Memory integral by trapezoid,
/// Heun outer step.  Throws std::invalid_argument on a bad rho0 or field.
DensityTrajectory solve_master_dephasing(const ControlField& field, const NoiseParams& p, const Mat2& rho0,
                                         const Mat2& coupling = pauli(2));

/// Purified-bath equation
///   d rho/dt = -h(t) int_0^t h(t') [S(t), [S(t'), rho(t')]] dt'
/// stepped as the pair (rho, M) with dM/dt = h [S, rho].
DensityTrajectory solve_effective_master(const ControlField& field, const NoiseParams& p, const Mat2& rho0);

/// Closed form without control: populations fixed, coherence times mu(t).
DensityTrajectory exact_no_control(const NoiseParams& p, const Mat2& rho0, int n_steps);

struct RwaReport {
  double ratio = 0.0;  // omega0 / omega_c
  bool valid = false;
  std::string message;
};
RwaReport rwa_check(double omega0, const NoiseParams& p);

/// Jaynes-Cummings damping after the rotating-wave approximation: the
/// dephasing machinery with coupling sigma_x and U_S generated by
/// f . sigma + omega0 sigma_z.  Prints nothing; call rwa_check for the warning.
DensityTrajectory solve_jc_amplitude_damping(const ControlField& f, const NoiseParams& p, double omega0,
                                             const Mat2& rho0);

/// F(t) = Tr[rho(0) rho(t)].  Throws std::invalid_argument for mixed rho0.
std::vector<double> fidelity_t(const DensityTrajectory& traj, const Mat2& rho0);

/// Evolves one pure state and returns the trajectory.
using StateSolver = std::function<DensityTrajectory(const Mat2& rho0)>;

/// Mean of Tr[|j><j| rho_j(t)] over the six Pauli eigenstates, each solved
/// independently.
std::vector<double> avg_fidelity_t(const StateSolver& solve, unsigned jobs = 0);

/// The six Pauli eigenstates as density matrices: +x, -x, +y, -y, +z, -z.
std::vector<Mat2> pauli_eigenstates();

/// Constant field i log(target) / tau, sampled on n_steps + 1 nodes.
ControlField trivial_hamiltonian(const Mat2& target, int n_steps, double tau = 1.0);

/// (1/2) int Tr_norm[H(t)^2] dt = (1/2) int |omega|^2 dt, trapezoid rule.
double energy_cost(const ControlField& field);

struct BlochPoint {
  double x, y, z, purity;
};
std::vector<BlochPoint> bloch_export(const DensityTrajectory& traj);

/// rho_S = U_S rho_I U_S^dagger.
DensityTrajectory to_schrodinger_picture(const DensityTrajectory& traj, const PropagatorTrajectory& us);

double trace_distance(const Mat2& a, const Mat2& b);

struct EquivalenceReport {
  /// Constant S: effective equation against d rho/dt = (mu_dot / 2 mu)(rho - S rho S).
  double summed_form_error = 0.0;
  /// omega_c tau << 1: each master equation against the lambda0-kernel form.
  double tcl2_vs_kernel = 0.0;
  double effective_vs_kernel = 0.0;
  bool pass_a = false;
  bool pass_b = false;
};

/// Runs both checks at n_steps.  `p` supplies eta and omega_T / omega_c for
/// check A; check B rescales to omega_c = 0.01 / tau with the same ratio.
EquivalenceReport master_equation_equivalence_checks(const NoiseParams& p, int n_steps = 1000);

/// Columns t,F,x,y,z,purity.
void write_trajectory_csv(std::ostream& os, const DensityTrajectory& traj, const Mat2& rho0);

}  // namespace cdd
