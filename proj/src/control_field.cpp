#include "cdd/control_field.hpp"

#include <cmath>
#include <stdexcept>

namespace cdd {

ControlField ControlField::zero(int n_steps, double tau) { return constant({0.0, 0.0, 0.0}, n_steps, tau); }

ControlField ControlField::constant(const Vec3& w, int n_steps, double tau) {
  if (n_steps < 1) throw std::invalid_argument("ControlField: need at least one step");
  ControlField f;
  const auto n = static_cast<std::size_t>(n_steps) + 1;
  f.t.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.t[i] = tau * static_cast<double>(i) / n_steps;
  f.wx.assign(n, w[0]);
  f.wy.assign(n, w[1]);
  f.wz.assign(n, w[2]);
  return f;
}

Vec3 ControlField::at(double time) const {
  if (t.empty()) return {0.0, 0.0, 0.0};
  if (time <= t.front()) return node(0);
  if (time >= t.back()) return node(t.size() - 1);
  const double x = (time - t.front()) / dt();
  auto i = static_cast<std::size_t>(x);
  if (i >= t.size() - 1) i = t.size() - 2;
  const double f = x - static_cast<double>(i);
  return {(1 - f) * wx[i] + f * wx[i + 1], (1 - f) * wy[i] + f * wy[i + 1], (1 - f) * wz[i] + f * wz[i + 1]};
}

void ControlField::validate() const {
  if (t.size() < 2) throw std::invalid_argument("ControlField: grid needs at least two nodes");
  if (wx.size() != t.size() || wy.size() != t.size() || wz.size() != t.size()) {
    throw std::invalid_argument("ControlField: component arrays must match the grid length");
  }
  const double h = dt();
  if (!(h > 0)) throw std::invalid_argument("ControlField: grid must be strictly increasing");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(t.back()))) {
      throw std::invalid_argument("ControlField: grid must be uniform");
    }
  }
}

}  // namespace cdd
