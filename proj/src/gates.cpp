#include "cdd/gates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace cdd {

const std::vector<NamedGate>& gate_library() {
  static const std::vector<NamedGate> lib = [] {
    const double r = 1.0 / std::sqrt(2.0);
    const double h = M_PI / 2 * r;
    Mat2 had, x, t;
    had << r, r, r, -r;
    x << 0, 1, 1, 0;
    t << 1, 0, 0, std::polar(1.0, M_PI / 4);
    return std::vector<NamedGate>{
        {"Hadamard", {h, 0.0, h}, had},
        {"X", {M_PI / 2, 0.0, 0.0}, x},
        {"T", {0.0, 0.0, M_PI / 8}, t},
        {"Identity", {0.0, 0.0, 0.0}, identity2()},
    };
  }();
  return lib;
}

std::optional<NamedGate> find_gate(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "h") n = "hadamard";
  if (n == "i" || n == "id") n = "identity";
  for (const auto& g : gate_library()) {
    std::string gn = g.name;
    std::transform(gn.begin(), gn.end(), gn.begin(), [](unsigned char c) { return std::tolower(c); });
    if (gn == n) return g;
  }
  return std::nullopt;
}

}  // namespace cdd
