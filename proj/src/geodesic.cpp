#include "cdd/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cdd {

Mat4 SplitUnitary::full() const {
  Mat4 u = Mat4::Zero();
  // basis |s a>: ancilla index is the fast one
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      u(2 * i, 2 * j) = plus(i, j);
      u(2 * i + 1, 2 * j + 1) = minus(i, j);
    }
  }
  return u;
}

SplitUnitary SplitUnitary::from_full(const Mat4& u) {
  SplitUnitary s;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      s.plus(i, j) = u(2 * i, 2 * j);
      s.minus(i, j) = u(2 * i + 1, 2 * j + 1);
    }
  }
  return s;
}

double split_infidelity(const SplitUnitary& u, const Mat2& target) {
  const Mat2 td = target.adjoint();
  return 1.0 - std::abs((td * u.plus).trace() + (td * u.minus).trace()) / 4.0;
}

namespace {

struct Blocks {
  Mat2 a_plus, a_minus;  // Lambda(0) restricted to each ancilla block
  double beta_scale;     // 1/q, or 0 on the sub-Riemannian flow

  Blocks(const GammaVector& lam, double q) {
    if (!(q > 0)) throw std::invalid_argument("geodesic flow: q must be positive");
    const Vec3 d = lam.distribution(), p = lam.penalised();
    a_plus = from_pauli({d[0] + p[0], d[1] + p[1], d[2] + p[2]});
    a_minus = from_pauli({d[0] - p[0], d[1] - p[1], d[2] - p[2]});
    beta_scale = std::isinf(q) ? 0.0 : 1.0 / q;
  }

  // P and Q coordinates of U Lambda(0) U^dagger.
  void rotated(const Mat2& vp, const Mat2& vm, Vec3& alpha, Vec3& beta) const {
    const Vec3 ap = pauli_coords(vp * a_plus * vp.adjoint());
    const Vec3 am = pauli_coords(vm * a_minus * vm.adjoint());
    for (int k = 0; k < 3; ++k) {
      alpha[k] = 0.5 * (ap[k] + am[k]);
      beta[k] = 0.5 * (ap[k] - am[k]);
    }
  }

  // dV/dt = -i G V per block, G± = alpha ± beta/q ∓ h sigma_z.
  void rhs(const Mat2& vp, const Mat2& vm, double h, Mat2& kp, Mat2& km) const {
    Vec3 alpha, beta;
    rotated(vp, vm, alpha, beta);
    const Vec3 gp{alpha[0] + beta_scale * beta[0], alpha[1] + beta_scale * beta[1],
                  alpha[2] + beta_scale * beta[2] - h};
    const Vec3 gm{alpha[0] - beta_scale * beta[0], alpha[1] - beta_scale * beta[1],
                  alpha[2] - beta_scale * beta[2] + h};
    kp = -kI * from_pauli(gp) * vp;
    km = -kI * from_pauli(gm) * vm;
  }
};

// One Newton-Schulz polar step; returns the pre-correction drift.
double reunitarize(Mat2& v) {
  const Mat2 g = v.adjoint() * v;
  const double drift = (g - Mat2::Identity()).cwiseAbs().maxCoeff();
  v = v * (3.0 * Mat2::Identity() - g) * 0.5;
  return drift;
}

template <typename Visit>
double integrate(const Blocks& b, const NoiseTable& noise, SplitUnitary& u, Visit&& visit) {
  const int n = noise.steps();
  const double dt = noise.dt();
  double max_drift = 0.0;
  Mat2& vp = u.plus;
  Mat2& vm = u.minus;
  Mat2 k1p, k1m, k2p, k2m, k3p, k3m, k4p, k4m;
  for (int i = 0; i < n; ++i) {
    const double h0 = noise.h_at(i), h1 = noise.h_at(i + 1), hm = 0.5 * (h0 + h1);
    b.rhs(vp, vm, h0, k1p, k1m);
    b.rhs(vp + 0.5 * dt * k1p, vm + 0.5 * dt * k1m, hm, k2p, k2m);
    b.rhs(vp + 0.5 * dt * k2p, vm + 0.5 * dt * k2m, hm, k3p, k3m);
    b.rhs(vp + dt * k3p, vm + dt * k3m, h1, k4p, k4m);
    vp += (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    vm += (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
    max_drift = std::max({max_drift, reunitarize(vp), reunitarize(vm)});
    visit(i + 1, u);
  }
  return max_drift;
}

}  // namespace

SplitUnitary flow_endpoint(const GammaVector& costate0, double q, const NoiseTable& noise, double* max_drift) {
  const Blocks b(costate0, q);
  SplitUnitary u;
  const double drift = integrate(b, noise, u, [](int, const SplitUnitary&) {});
  if (max_drift) *max_drift = drift;
  return u;
}

double endpoint_infidelity(const GammaVector& costate0, double q, const NoiseTable& noise, const Mat2& target) {
  return split_infidelity(flow_endpoint(costate0, q, noise), target);
}

GeodesicSolution propagate_q(const GammaVector& costate0, double q, const NoiseTable& noise, const Mat2* target) {
  const Blocks b(costate0, q);
  GeodesicSolution sol;
  sol.costate0 = costate0;
  sol.q = q;
  const int n = noise.steps();
  sol.t.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) sol.t[static_cast<std::size_t>(i)] = noise.time(i);
  sol.trajectory.reserve(static_cast<std::size_t>(n) + 1);
  SplitUnitary u;
  sol.trajectory.push_back(u);
  sol.max_unitarity_drift = integrate(b, noise, u, [&](int, const SplitUnitary& v) { sol.trajectory.push_back(v); });
  sol.unitarity_blowup = sol.max_unitarity_drift > kUnitarityBlowup;
  if (target) sol.achieved_infidelity = split_infidelity(u, *target);
  sol.control = extract_control(sol);
  return sol;
}

GeodesicSolution propagate_sub(const GammaVector& costate0, const NoiseTable& noise, const Mat2* target) {
  return propagate_q(costate0, kSubRiemannian, noise, target);
}

ControlField extract_control(const GeodesicSolution& sol) {
  if (sol.trajectory.empty()) throw std::invalid_argument("extract_control: empty trajectory");
  const Blocks b(sol.costate0, sol.q);
  ControlField f;
  f.t = sol.t;
  const std::size_t n = sol.trajectory.size();
  f.wx.resize(n);
  f.wy.resize(n);
  f.wz.resize(n);
  Vec3 alpha, beta;
  for (std::size_t i = 0; i < n; ++i) {
    b.rotated(sol.trajectory[i].plus, sol.trajectory[i].minus, alpha, beta);
    f.wx[i] = alpha[0];
    f.wy[i] = alpha[1];
    f.wz[i] = alpha[2];
  }
  return f;
}

GammaVector initial_guess(const Mat2& target, double q, const NoiseParams& p) {
  if (!(q > 0) || std::isinf(q)) throw std::invalid_argument("initial_guess: q must be positive and finite");
  // exp(-i u.sigma) has eigenphases -+|u|; the cut sits at |u| = pi
  Mat2 t = target;
  Vec3 u = axis_from_unitary(t);
  const double theta = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (M_PI - theta < 1e-8) {
    t = t * target_from_axis({0.0, 0.0, 1e-8});
    u = axis_from_unitary(t);
  }
  GammaVector lam;
  lam[0] = u[0] / p.tau;
  lam[1] = u[1] / p.tau;
  lam[2] = u[2] / p.tau;
  lam[5] = q * h_of_t(0.0, p);
  return lam;
}

InfidelityMinimization minimize_infidelity(const GammaVector& seed, const Mat2& target, double q,
                                           const NoiseTable& noise, const MinimizeOptions& opt) {
  const Objective6 f = [&](const Point6& x) { return endpoint_infidelity(GammaVector{x}, q, noise, target); };
  InfidelityMinimization out;
  out.details = minimize6(f, seed.c, opt);
  out.costate = GammaVector{out.details.x};
  out.infidelity = out.details.f;
  return out;
}

std::string to_string(ShootStatus s) {
  switch (s) {
    case ShootStatus::Converged: return "converged";
    case ShootStatus::Improved: return "improved";
    case ShootStatus::Diverged: return "diverged";
    case ShootStatus::BranchCut: return "branch-cut";
  }
  return "unknown";
}

GammaVector shooting_residual(const SplitUnitary& u, const Mat2& target) {
  const Mat2 td = target.adjoint();
  Mat2 ep = td * u.plus, em = td * u.minus;
  if ((ep.trace() + em.trace()).real() < 0) {
    ep = -ep;
    em = -em;
  }
  const Vec3 rp = pauli_coords(kI * mat_log(ep));
  const Vec3 rm = pauli_coords(kI * mat_log(em));
  GammaVector r;
  for (int k = 0; k < 3; ++k) {
    r[static_cast<std::size_t>(k)] = 0.5 * (rp[k] + rm[k]);
    r[static_cast<std::size_t>(k) + 3] = 0.5 * (rp[k] - rm[k]);
  }
  return r;
}

ShootResult shoot_newton(const GammaVector& costate, const Mat2& target, double q, const NoiseTable& noise,
                         const ShootOptions& opt) {
  ShootResult res;
  res.costate = costate;
  SplitUnitary u = flow_endpoint(costate, q, noise);
  res.infidelity = split_infidelity(u, target);
  const double start_infidelity = res.infidelity;

  GammaVector r;
  try {
    r = shooting_residual(u, target);
  } catch (const BranchCutError&) {
    res.status = ShootStatus::BranchCut;
    return res;
  }
  res.residual_norm = r.norm();

  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  while (res.iterations < opt.max_iterations && res.residual_norm > opt.residual_tol &&
         res.infidelity > opt.infidelity_tol) {
    ++res.iterations;
    Mat6 jac;
    Vec6 rv;
    bool cut = false;
    for (int i = 0; i < 6; ++i) rv(i) = r[static_cast<std::size_t>(i)];
    for (int j = 0; j < 6 && !cut; ++j) {
      GammaVector lp = res.costate;
      const double step = opt.fd_step * std::max(1.0, std::abs(lp[static_cast<std::size_t>(j)]));
      lp[static_cast<std::size_t>(j)] += step;
      try {
        const GammaVector rp = shooting_residual(flow_endpoint(lp, q, noise), target);
        for (int i = 0; i < 6; ++i) jac(i, j) = (rp[static_cast<std::size_t>(i)] - rv(i)) / step;
      } catch (const BranchCutError&) {
        cut = true;
      }
    }
    if (cut) break;
    const Vec6 delta = jac.colPivHouseholderQr().solve(-rv);
    if (!delta.allFinite()) break;

    // damped step: accept only an infidelity decrease
    bool accepted = false;
    for (double s = 1.0; s >= 1.0 / 16 && !accepted; s *= 0.5) {
      GammaVector trial = res.costate;
      for (int i = 0; i < 6; ++i) trial[static_cast<std::size_t>(i)] += s * delta(i);
      const SplitUnitary ut = flow_endpoint(trial, q, noise);
      const double inf = split_infidelity(ut, target);
      if (!(inf < res.infidelity)) continue;
      try {
        r = shooting_residual(ut, target);
      } catch (const BranchCutError&) {
        continue;
      }
      res.costate = trial;
      res.infidelity = inf;
      res.residual_norm = r.norm();
      accepted = true;
    }
    if (!accepted) break;
  }

  if (res.residual_norm <= opt.residual_tol || res.infidelity <= opt.infidelity_tol) {
    res.status = ShootStatus::Converged;
  } else if (res.infidelity < start_infidelity) {
    res.status = ShootStatus::Improved;
  } else {
    res.status = ShootStatus::Diverged;
  }
  return res;
}

RefineResult refine_costate(const GammaVector& seed, const Mat2& target, double q, const NoiseTable& noise,
                            double tol, const MinimizeOptions& mopt, const ShootOptions& sopt, bool always_shoot) {
  MinimizeOptions m = mopt;
  m.tol = tol;
  const InfidelityMinimization mr = minimize_infidelity(seed, target, q, noise, m);
  RefineResult out{mr.costate, mr.infidelity};
  if (always_shoot || out.infidelity > tol) {
    const ShootResult sr = shoot_newton(out.costate, target, q, noise, sopt);
    if (sr.infidelity < out.infidelity) {
      out.costate = sr.costate;
      out.infidelity = sr.infidelity;
    }
  }
  return out;
}

double JumpSchedule::chi() const { return std::log10(q_max / q_in) / n_it; }
double JumpSchedule::factor() const { return std::pow(10.0, chi()); }

void JumpSchedule::validate() const {
  if (!(q_in > 0) || !std::isfinite(q_in)) throw std::invalid_argument("JumpSchedule: q_in must be positive");
  if (!(q_max > q_in) || !std::isfinite(q_max)) throw std::invalid_argument("JumpSchedule: q_max must exceed q_in");
  if (n_it < 1) throw std::invalid_argument("JumpSchedule: n_it must be at least 1");
}

std::string to_string(QJumpStatus s) { return s == QJumpStatus::Converged ? "converged" : "exhausted"; }

QJumpResult q_jump(const Mat2& target, const NoiseTable& noise, const JumpSchedule& schedule,
                   const QJumpOptions& opt) {
  schedule.validate();
  QJumpResult res;
  double q = schedule.q_in;
  GammaVector lam = opt.seed ? *opt.seed : initial_guess(target, q, noise.params());

  RefineResult cur = refine_costate(lam, target, q, noise, opt.tol, opt.minimize, opt.shoot);
  res.history.push_back({q, cur.infidelity, 0, cur.infidelity <= opt.tol});

  const double chi = schedule.chi();
  for (int it = 0; it < schedule.n_it; ++it) {
    const double remaining = std::log10(schedule.q_max / q);
    if (remaining <= 1e-12) break;
    // the final jump lands exactly on q_max
    double c = std::min(chi, remaining);
    RefineResult best{cur.costate, std::numeric_limits<double>::infinity()};
    double best_q = q;
    int retries = 0;
    for (;; ++retries) {
      const double q_next = (c == remaining) ? schedule.q_max : q * std::pow(10.0, c);
      const RefineResult trial = refine_costate(cur.costate, target, q_next, noise, opt.tol, opt.minimize, opt.shoot);
      if (trial.infidelity < best.infidelity) {
        best = trial;
        best_q = q_next;
      }
      if (trial.infidelity <= opt.tol || retries >= opt.max_halvings) break;
      c *= 0.5;
    }
    q = best_q;
    cur = best;
    res.history.push_back({q, cur.infidelity, retries, cur.infidelity <= opt.tol});
  }

  res.penalised_costate = cur.costate;
  res.penalised_infidelity = cur.infidelity;
  res.q_reached = q;
  bool ok = cur.infidelity <= opt.tol && q >= schedule.q_max * (1 - 1e-12);

  if (opt.finish_sub_riemannian) {
    const RefineResult sub =
        refine_costate(cur.costate, target, kSubRiemannian, noise, opt.tol, opt.minimize, opt.shoot, true);
    res.solution = propagate_sub(sub.costate, noise, &target);
    res.history.push_back({kSubRiemannian, res.solution.achieved_infidelity, 0,
                           res.solution.achieved_infidelity <= opt.tol});
    ok = ok && res.solution.achieved_infidelity <= opt.tol;
  } else {
    res.solution = propagate_q(cur.costate, q, noise, &target);
  }
  res.status = ok ? QJumpStatus::Converged : QJumpStatus::Exhausted;
  return res;
}

}  // namespace cdd
