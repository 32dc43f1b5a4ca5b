#pragma once

// Seeded generators for property tests.

#include <random>

#include "cdd/algebra.hpp"

namespace cdd::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240917);
  return g;
}

inline double normal(double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng()); }
inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline GammaVector random_gamma(double sd = 1.0) {
  GammaVector g;
  for (auto& c : g.c) c = normal(sd);
  return g;
}

inline Vec3 random_vec3(double sd = 1.0) { return {normal(sd), normal(sd), normal(sd)}; }

template <int N>
Eigen::Matrix<cplx, N, N> random_hermitian(double sd = 1.0) {
  Eigen::Matrix<cplx, N, N> m;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = cplx(normal(sd), normal(sd));
  return 0.5 * (m + m.adjoint());
}

/// Axis-angle vector with |u| in [0, max_theta].
inline Vec3 random_axis(double max_theta) {
  Vec3 d = random_vec3();
  const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const double th = uniform(0.0, max_theta);
  return {d[0] / n * th, d[1] / n * th, d[2] / n * th};
}

inline Mat2 random_pure_state() {
  Eigen::Matrix<cplx, 2, 1> v(cplx(normal(), normal()), cplx(normal(), normal()));
  v.normalize();
  return v * v.adjoint();
}

}  // namespace cdd::testing
