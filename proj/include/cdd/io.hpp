#pragma once

// Solution documents and plot-ready CSV output.

#include <iosfwd>

#include "cdd/control_field.hpp"
#include "cdd/geodesic.hpp"

namespace cdd {

/// JSON shape: {u, lambda0, q, q_max, infidelity, grid_n, energy,
/// control: {t, wx, wy, wz}}.  q is the string "inf" for the
/// sub-Riemannian flow.
struct SolutionDocument {
  Vec3 u{};
  GammaVector lambda0;
  double q = kSubRiemannian;
  double q_max = 0.0;
  double infidelity = 0.0;
  int grid_n = 0;
  double energy = 0.0;
  ControlField control;
};

SolutionDocument make_document(const GeodesicSolution& sol, const Vec3& u, double q_max);
void write_solution_json(std::ostream& os, const SolutionDocument& doc);
/// Throws std::runtime_error on schema mismatch.
SolutionDocument read_solution_json(std::istream& is);

/// Columns t,wx,wy,wz.
void write_control_csv(std::ostream& os, const ControlField& f);

}  // namespace cdd
