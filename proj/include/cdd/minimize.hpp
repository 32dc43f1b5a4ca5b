#pragma once

// Local minimisation over R^6 for the costate search.  Quasi-Newton (BFGS)
// with central-difference gradients, falling back to the Nelder-Mead simplex
// when the gradient step fails.  Both are backed by GSL's multimin.

#include <array>
#include <functional>
#include <string>

namespace cdd {

using Point6 = std::array<double, 6>;
using Objective6 = std::function<double(const Point6&)>;

enum class MinimizeStatus { Converged, LocalMinimum, MaxEvaluations, Stagnation };

std::string to_string(MinimizeStatus s);

struct MinimizeOptions {
  double tol = 1e-4;             // stop once f <= tol
  int max_evaluations = 4000;
  int stagnation_window = 50;    // iterations without an improvement above
  double stagnation_delta = 1e-12;
  double gradient_step = 1e-6;
  double simplex_step = 0.05;
};

struct MinimizeResult {
  Point6 x{};
  double f = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool used_simplex = false;
  MinimizeStatus status = MinimizeStatus::Converged;
};

/// Never returns a point worse than x0.
MinimizeResult minimize6(const Objective6& f, const Point6& x0, const MinimizeOptions& opt = {});

}  // namespace cdd
