#pragma once

// Reuse of dephasing-optimal controls against Jaynes-Cummings damping.  The
// sigma_x coupling is the sigma_z coupling conjugated by the cyclic axis
// permutation {x, y, z} -> {z, x, y}, so a dephasing solution for
// U_cor^dagger U U_cor, with its fields permuted, implements U.

#include "cdd/algebra.hpp"
#include "cdd/control_field.hpp"

namespace cdd {

/// f_x = omega_z, f_y = omega_x, f_z = omega_y - omega0.
ControlField permute_fields(const ControlField& field, double omega0);

/// Inverse of permute_fields for the same omega0.
ControlField unpermute_fields(const ControlField& f, double omega0);

/// C1 = (Z - X)/sqrt2, C2 = (Y - Z)/sqrt2.
Mat2 correction_c1();
Mat2 correction_c2();
/// U_cor = C2 C1, with U_cor^dagger (X, Y, Z) U_cor = (Z, X, Y).
Mat2 correction_operator();

/// R^dagger U R.
Mat2 conjugate_target(const Mat2& u, const Mat2& r = correction_operator());

}  // namespace cdd
