#include "cdd/ampdamp.hpp"

#include <cmath>

namespace cdd {

ControlField permute_fields(const ControlField& field, double omega0) {
  ControlField f = field;
  f.wx = field.wz;
  f.wy = field.wx;
  f.wz = field.wy;
  for (double& z : f.wz) z -= omega0;
  return f;
}

ControlField unpermute_fields(const ControlField& f, double omega0) {
  ControlField w = f;
  w.wx = f.wy;
  w.wy = f.wz;
  w.wz = f.wx;
  for (double& y : w.wy) y += omega0;
  return w;
}

Mat2 correction_c1() { return (pauli(2) - pauli(0)) / std::sqrt(2.0); }
Mat2 correction_c2() { return (pauli(1) - pauli(2)) / std::sqrt(2.0); }
Mat2 correction_operator() { return correction_c2() * correction_c1(); }

Mat2 conjugate_target(const Mat2& u, const Mat2& r) { return r.adjoint() * u * r; }

}  // namespace cdd
