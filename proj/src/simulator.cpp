#include "cdd/simulator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "cdd/parallel.hpp"

namespace cdd {

namespace {

void validate_density(const Mat2& rho) {
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(rho.trace() - 1.0) > 1e-10) throw std::invalid_argument("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Mat2> es(rho);
  if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument("density matrix is not positive");
}

Mat2 hermitize(const Mat2& m) { return 0.5 * (m + m.adjoint()); }

void check_grid(const ControlField& field, const NoiseParams& p) {
  field.validate();
  if (std::abs(field.t.front()) > 1e-12 || std::abs(field.duration() - p.tau) > 1e-9 * p.tau) {
    throw std::invalid_argument("control grid must span [0, tau] of the noise parameters");
  }
}

Mat2 comm(const Mat2& a, const Mat2& b) { return a * b - b * a; }

// Shared driver for the Heun loops: rhs(i, rho) -> d rho/dt at node i.
template <typename Rhs>
DensityTrajectory heun(const std::vector<double>& t, const Mat2& rho0, Rhs&& rhs) {
  DensityTrajectory out;
  out.t = t;
  out.rho.reserve(t.size());
  out.rho.push_back(rho0);
  Mat2 rho = rho0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    const Mat2 k1 = rhs(i, rho);
    const Mat2 k2 = rhs(i + 1, Mat2(rho + dt * k1));
    rho = hermitize(rho + 0.5 * dt * (k1 + k2));
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace() - 1.0));
    out.rho.push_back(rho);
  }
  return out;
}

std::vector<double> uniform_grid(int n_steps, double tau) {
  std::vector<double> t(static_cast<std::size_t>(n_steps) + 1);
  for (int i = 0; i <= n_steps; ++i) t[static_cast<std::size_t>(i)] = tau * i / n_steps;
  return t;
}

// TCL2 with the coupling history S already in the interaction picture.
DensityTrajectory tcl2(const std::vector<double>& t, const std::vector<Mat2>& s, const NoiseTable& noise,
                       const Mat2& rho0) {
  const std::size_t n = s.size();
  const double dt = noise.dt();
  std::vector<Mat2> k(n, Mat2::Zero());
  for (std::size_t i = 1; i < n; ++i) {
    Mat2 acc = 0.5 * noise.correlation_lag(static_cast<int>(i)) * s[0] + 0.5 * noise.correlation_lag(0) * s[i];
    for (std::size_t j = 1; j < i; ++j) acc += noise.correlation_lag(static_cast<int>(i - j)) * s[j];
    k[i] = dt * acc;
  }
  return heun(t, rho0, [&](std::size_t i, const Mat2& rho) -> Mat2 {
    const Mat2& si = s[i];
    const Mat2 kd = k[i].adjoint();
    return -(si * k[i] * rho - k[i] * rho * si + rho * kd * si - si * rho * kd);
  });
}

DensityTrajectory effective(const std::vector<double>& t, const std::vector<Mat2>& s, const NoiseTable& noise,
                            const Mat2& rho0) {
  DensityTrajectory out;
  out.t = t;
  out.rho.reserve(t.size());
  out.rho.push_back(rho0);
  Mat2 rho = rho0, m = Mat2::Zero();
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    const double h0 = noise.h_at(static_cast<int>(i)), h1 = noise.h_at(static_cast<int>(i + 1));
    const Mat2 r1 = -h0 * comm(s[i], m), m1 = h0 * comm(s[i], rho);
    const Mat2 rp = rho + dt * r1, mp = m + dt * m1;
    const Mat2 r2 = -h1 * comm(s[i + 1], mp), m2 = h1 * comm(s[i + 1], rp);
    rho = hermitize(rho + 0.5 * dt * (r1 + r2));
    m += 0.5 * dt * (m1 + m2);
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace() - 1.0));
    out.rho.push_back(rho);
  }
  return out;
}

}  // namespace

PropagatorTrajectory schrodinger_Us(const ControlField& field) {
  field.validate();
  PropagatorTrajectory out;
  const std::size_t n = field.size();
  out.u.reserve(n);
  Mat2 u = Mat2::Identity();
  out.u.push_back(u);
  const double dt = field.dt();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Mat2 h0 = field.hamiltonian(i), h1 = field.hamiltonian(i + 1), hm = 0.5 * (h0 + h1);
    const Mat2 k1 = -kI * h0 * u;
    const Mat2 k2 = -kI * hm * (u + 0.5 * dt * k1);
    const Mat2 k3 = -kI * hm * (u + 0.5 * dt * k2);
    const Mat2 k4 = -kI * h1 * (u + dt * k3);
    u += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const Mat2 g = u.adjoint() * u;
    out.max_unitarity_drift = std::max(out.max_unitarity_drift, (g - Mat2::Identity()).cwiseAbs().maxCoeff());
    u = u * (3.0 * Mat2::Identity() - g) * 0.5;
    out.u.push_back(u);
  }
  out.unitarity_blowup = out.max_unitarity_drift > 1e-8;
  return out;
}

std::vector<Mat2> coupling_in_interaction_picture(const PropagatorTrajectory& us, const Mat2& coupling) {
  std::vector<Mat2> s;
  s.reserve(us.u.size());
  for (const Mat2& u : us.u) s.push_back(hermitize(u.adjoint() * coupling * u));
  return s;
}

DensityTrajectory solve_master_dephasing(const ControlField& field, const NoiseParams& p, const Mat2& rho0,
                                         const Mat2& coupling) {
  check_grid(field, p);
  validate_density(rho0);
  const NoiseTable noise(p, field.steps());
  return tcl2(field.t, coupling_in_interaction_picture(schrodinger_Us(field), coupling), noise, rho0);
}

DensityTrajectory solve_effective_master(const ControlField& field, const NoiseParams& p, const Mat2& rho0) {
  check_grid(field, p);
  validate_density(rho0);
  const NoiseTable noise(p, field.steps());
  return effective(field.t, coupling_in_interaction_picture(schrodinger_Us(field), pauli(2)), noise, rho0);
}

DensityTrajectory exact_no_control(const NoiseParams& p, const Mat2& rho0, int n_steps) {
  validate_density(rho0);
  if (n_steps < 1) throw std::invalid_argument("exact_no_control: need at least one step");
  DensityTrajectory out;
  out.t = uniform_grid(n_steps, p.tau);
  for (double t : out.t) {
    Mat2 r = rho0;
    const double m = mu(t, p);
    r(0, 1) *= m;
    r(1, 0) *= m;
    out.rho.push_back(r);
  }
  return out;
}

RwaReport rwa_check(double omega0, const NoiseParams& p) {
  RwaReport r;
  r.ratio = omega0 / p.omega_c;
  r.valid = omega0 > 0 && r.ratio >= 0.5 && r.ratio <= 2.0;
  if (omega0 <= 0) {
    r.message = "qubit gap must be positive";
  } else if (!r.valid) {
    r.message = "omega0/omega_c outside [0.5, 2]: counter-rotating terms are not negligible";
  }
  return r;
}

DensityTrajectory solve_jc_amplitude_damping(const ControlField& f, const NoiseParams& p, double omega0,
                                             const Mat2& rho0) {
  ControlField eff = f;
  for (double& z : eff.wz) z += omega0;
  return solve_master_dephasing(eff, p, rho0, pauli(0));
}

std::vector<double> fidelity_t(const DensityTrajectory& traj, const Mat2& rho0) {
  validate_density(rho0);
  if (std::abs((rho0 * rho0).trace().real() - 1.0) > 1e-9) {
    throw std::invalid_argument("fidelity_t: reference state must be pure");
  }
  std::vector<double> f;
  f.reserve(traj.rho.size());
  for (const Mat2& r : traj.rho) f.push_back((rho0 * r).trace().real());
  return f;
}

std::vector<Mat2> pauli_eigenstates() {
  std::vector<Mat2> out;
  for (int k = 0; k < 3; ++k) {
    for (double sgn : {1.0, -1.0}) out.push_back(0.5 * (identity2() + sgn * pauli(k)));
  }
  return out;
}

std::vector<double> avg_fidelity_t(const StateSolver& solve, unsigned jobs) {
  const std::vector<Mat2> states = pauli_eigenstates();
  std::vector<std::vector<double>> f(states.size());
  parallel_for(states.size(), jobs, [&](std::size_t j) { f[j] = fidelity_t(solve(states[j]), states[j]); });
  std::vector<double> avg(f[0].size(), 0.0);
  for (const auto& fj : f) {
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += fj[i] / static_cast<double>(states.size());
  }
  return avg;
}

ControlField trivial_hamiltonian(const Mat2& target, int n_steps, double tau) {
  const Vec3 w = pauli_coords(kI * mat_log(target));
  return ControlField::constant({w[0] / tau, w[1] / tau, w[2] / tau}, n_steps, tau);
}

double energy_cost(const ControlField& field) {
  double e = 0.0;
  auto sq = [&](std::size_t i) { return field.wx[i] * field.wx[i] + field.wy[i] * field.wy[i] + field.wz[i] * field.wz[i]; };
  for (std::size_t i = 0; i + 1 < field.size(); ++i) e += 0.5 * (sq(i) + sq(i + 1)) * (field.t[i + 1] - field.t[i]);
  return 0.5 * e;
}

std::vector<BlochPoint> bloch_export(const DensityTrajectory& traj) {
  std::vector<BlochPoint> out;
  out.reserve(traj.rho.size());
  for (const Mat2& r : traj.rho) {
    out.push_back({(r * pauli(0)).trace().real(), (r * pauli(1)).trace().real(), (r * pauli(2)).trace().real(),
                   (r * r).trace().real()});
  }
  return out;
}

DensityTrajectory to_schrodinger_picture(const DensityTrajectory& traj, const PropagatorTrajectory& us) {
  if (us.u.size() != traj.rho.size()) throw std::invalid_argument("propagator and trajectory lengths differ");
  DensityTrajectory out = traj;
  for (std::size_t i = 0; i < out.rho.size(); ++i) out.rho[i] = us.u[i] * traj.rho[i] * us.u[i].adjoint();
  return out;
}

double trace_distance(const Mat2& a, const Mat2& b) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(hermitize(a - b));
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

EquivalenceReport master_equation_equivalence_checks(const NoiseParams& p, int n_steps) {
  EquivalenceReport rep;
  const Mat2 plus = 0.5 * (identity2() + pauli(0));
  auto max_distance = [](const DensityTrajectory& a, const DensityTrajectory& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i) d = std::max(d, trace_distance(a.rho[i], b.rho[i]));
    return d;
  };

  // A: no control, S = sigma_z throughout
  {
    const ControlField zero = ControlField::zero(n_steps, p.tau);
    const DensityTrajectory eff = solve_effective_master(zero, p, plus);
    const Mat2& s = pauli(2);
    std::vector<double> rate(zero.size());
    for (std::size_t i = 0; i < rate.size(); ++i) {
      rate[i] = mu_dot(zero.t[i], p) / (2.0 * mu(zero.t[i], p));
    }
    const DensityTrajectory summed =
        heun(zero.t, plus, [&](std::size_t i, const Mat2& rho) -> Mat2 { return rate[i] * (rho - s * rho * s); });
    rep.summed_form_error = max_distance(eff, summed);
    rep.pass_a = rep.summed_form_error <= 1e-4;
  }

  // B: slow bath, lambda0-kernel approximation
  {
    NoiseParams slow = p;
    slow.omega_c = 0.01 / p.tau;
    slow.omega_T = p.omega_T / p.omega_c * slow.omega_c;
    const double l0 = lambda0(slow);
    ControlField field = ControlField::zero(n_steps, p.tau);
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double x = M_PI * field.t[i] / p.tau;
      field.wx[i] = 0.3 * std::sin(x);
      field.wy[i] = 0.2;
      field.wz[i] = 0.3 * std::cos(x);
    }
    const std::vector<Mat2> s = coupling_in_interaction_picture(schrodinger_Us(field), pauli(2));
    std::vector<Mat2> integral(s.size(), Mat2::Zero());
    for (std::size_t i = 1; i < s.size(); ++i) {
      integral[i] = integral[i - 1] + 0.5 * (field.t[i] - field.t[i - 1]) * (s[i - 1] + s[i]);
    }
    const DensityTrajectory kernel = heun(field.t, plus, [&](std::size_t i, const Mat2& rho) -> Mat2 {
      return -l0 * comm(s[i], comm(integral[i], rho));
    });
    rep.tcl2_vs_kernel = max_distance(solve_master_dephasing(field, slow, plus), kernel);
    rep.effective_vs_kernel = max_distance(solve_effective_master(field, slow, plus), kernel);
    rep.pass_b = rep.tcl2_vs_kernel <= 1e-3 && rep.effective_vs_kernel <= 1e-3;
  }
  return rep;
}

void write_trajectory_csv(std::ostream& os, const DensityTrajectory& traj, const Mat2& rho0) {
  const std::vector<double> f = fidelity_t(traj, rho0);
  const std::vector<BlochPoint> b = bloch_export(traj);
  os << "t,F,x,y,z,purity\n" << std::setprecision(12);
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    os << traj.t[i] << ',' << f[i] << ',' << b[i].x << ',' << b[i].y << ',' << b[i].z << ',' << b[i].purity << '\n';
  }
}

}  // namespace cdd
