#include "cdd/minimize.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace cdd {

std::string to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::Converged: return "converged";
    case MinimizeStatus::LocalMinimum: return "local-minimum";
    case MinimizeStatus::MaxEvaluations: return "max-evaluations";
    case MinimizeStatus::Stagnation: return "stagnation";
  }
  return "unknown";
}

namespace {

struct Tracker {
  const Objective6* f;
  const MinimizeOptions* opt;
  int evaluations = 0;
  double best_f = std::numeric_limits<double>::infinity();
  Point6 best_x{};

  double eval(const Point6& x) {
    ++evaluations;
    double v = (*f)(x);
    if (!std::isfinite(v)) v = std::numeric_limits<double>::max();
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
    return v;
  }
  bool exhausted() const { return evaluations >= opt->max_evaluations; }
  bool done() const { return best_f <= opt->tol; }
};

Point6 to_point(const gsl_vector* v) {
  Point6 p;
  for (std::size_t i = 0; i < 6; ++i) p[i] = gsl_vector_get(v, i);
  return p;
}

double gsl_f(const gsl_vector* v, void* params) {
  return static_cast<Tracker*>(params)->eval(to_point(v));
}

void gsl_fdf(const gsl_vector* v, void* params, double* fval, gsl_vector* g) {
  auto* tr = static_cast<Tracker*>(params);
  Point6 x = to_point(v);
  *fval = tr->eval(x);
  for (std::size_t i = 0; i < 6; ++i) {
    const double h = tr->opt->gradient_step * std::max(1.0, std::abs(x[i]));
    Point6 xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    gsl_vector_set(g, i, (tr->eval(xp) - tr->eval(xm)) / (2 * h));
  }
}

void gsl_df(const gsl_vector* v, void* params, gsl_vector* g) {
  double unused;
  gsl_fdf(v, params, &unused, g);
}

struct VecDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
using VecPtr = std::unique_ptr<gsl_vector, VecDeleter>;

VecPtr make_vector(const Point6& p) {
  VecPtr v(gsl_vector_alloc(6));
  for (std::size_t i = 0; i < 6; ++i) gsl_vector_set(v.get(), i, p[i]);
  return v;
}

// Runs BFGS; returns false if the line search gave up and the simplex should
// take over.
bool run_bfgs(Tracker& tr, const Point6& x0, MinimizeResult& res) {
  gsl_multimin_function_fdf fn{&gsl_f, &gsl_df, &gsl_fdf, 6, &tr};
  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, 6), &gsl_multimin_fdfminimizer_free);
  auto x = make_vector(x0);
  gsl_multimin_fdfminimizer_set(s.get(), &fn, x.get(), 0.01, 0.1);

  double last_best = tr.best_f;
  int since_improvement = 0;
  while (!tr.done() && !tr.exhausted()) {
    ++res.iterations;
    if (gsl_multimin_fdfminimizer_iterate(s.get()) != GSL_SUCCESS) return false;
    if (gsl_multimin_test_gradient(s.get()->gradient, 1e-12) == GSL_SUCCESS) {
      res.status = MinimizeStatus::LocalMinimum;
      return true;
    }
    if (last_best - tr.best_f > tr.opt->stagnation_delta) {
      last_best = tr.best_f;
      since_improvement = 0;
    } else if (++since_improvement >= tr.opt->stagnation_window) {
      res.status = MinimizeStatus::Stagnation;
      return true;
    }
  }
  return true;
}

void run_simplex(Tracker& tr, const Point6& x0, MinimizeResult& res) {
  gsl_multimin_function fn{&gsl_f, 6, &tr};
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 6), &gsl_multimin_fminimizer_free);
  auto x = make_vector(x0);
  VecPtr step(gsl_vector_alloc(6));
  gsl_vector_set_all(step.get(), tr.opt->simplex_step);
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

  double last_best = tr.best_f;
  int since_improvement = 0;
  while (!tr.done() && !tr.exhausted()) {
    ++res.iterations;
    if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) {
      res.status = MinimizeStatus::LocalMinimum;
      return;
    }
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-12) == GSL_SUCCESS) {
      res.status = MinimizeStatus::LocalMinimum;
      return;
    }
    if (last_best - tr.best_f > tr.opt->stagnation_delta) {
      last_best = tr.best_f;
      since_improvement = 0;
    } else if (++since_improvement >= 4 * tr.opt->stagnation_window) {
      // simplex moves are cheaper and smaller, give it a longer window
      res.status = MinimizeStatus::Stagnation;
      return;
    }
  }
}

}  // namespace

MinimizeResult minimize6(const Objective6& f, const Point6& x0, const MinimizeOptions& opt) {
  gsl_set_error_handler_off();
  Tracker tr{&f, &opt};
  MinimizeResult res;
  tr.eval(x0);

  if (!tr.done()) {
    const bool bfgs_ok = run_bfgs(tr, x0, res);
    if (!bfgs_ok && !tr.done() && !tr.exhausted()) {
      res.used_simplex = true;
      res.status = MinimizeStatus::Converged;
      run_simplex(tr, tr.best_x, res);
    }
  }

  res.x = tr.best_x;
  res.f = tr.best_f;
  res.evaluations = tr.evaluations;
  if (tr.done()) {
    res.status = MinimizeStatus::Converged;
  } else if (tr.exhausted()) {
    res.status = MinimizeStatus::MaxEvaluations;
  }
  return res;
}

}  // namespace cdd
