#pragma once

// Named single-qubit gates as axis-angle vectors u, gate = exp(-i u.sigma)
// up to global phase.

#include <optional>
#include <string>
#include <vector>

#include "cdd/algebra.hpp"

namespace cdd {

struct NamedGate {
  std::string name;
  Vec3 u;
  Mat2 matrix;  // conventional form, e.g. T = diag(1, e^{i pi/4})
};

const std::vector<NamedGate>& gate_library();
/// Case-insensitive; accepts H/Hadamard, X, T, I/Identity.
std::optional<NamedGate> find_gate(const std::string& name);

}  // namespace cdd
