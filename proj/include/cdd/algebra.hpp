#pragma once

// Dense 2x2 / 4x4 complex algebra for the purified qubit (system ⊗ ancilla).
//
// Tensor ordering is (system qubit) ⊗ (ancilla qubit) with basis
// |00>, |01>, |10>, |11>.  The six-element basis of the reachable
// sub-algebra is
//   gamma_1..3 = sigma_{x,y,z} ⊗ I      (controllable directions)
//   gamma_4..6 = sigma_{x,y,z} ⊗ sigma_z (penalised directions)
// and is orthonormal under the normalised trace Tr(AB)/dim.

#include <array>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace cdd {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix<cplx, 2, 2>;
using Mat4 = Eigen::Matrix<cplx, 4, 4>;
using Vec3 = std::array<double, 3>;

inline constexpr cplx kI{0.0, 1.0};

const Mat2& pauli(int k);  // k = 0,1,2 -> x,y,z
Mat2 identity2();
Mat4 identity4();
Mat4 kron(const Mat2& a, const Mat2& b);

/// Coefficients of a Hermitian operator in the gamma basis.  Index 0..2 are
/// the distribution (sigma_k ⊗ I), 3..5 the penalised block (sigma_k ⊗ sigma_z).
struct GammaVector {
  std::array<double, 6> c{};

  double& operator[](std::size_t i) { return c[i]; }
  double operator[](std::size_t i) const { return c[i]; }

  GammaVector& operator+=(const GammaVector& o);
  GammaVector& operator-=(const GammaVector& o);
  GammaVector& operator*=(double s);
  friend GammaVector operator+(GammaVector a, const GammaVector& b) { return a += b; }
  friend GammaVector operator-(GammaVector a, const GammaVector& b) { return a -= b; }
  friend GammaVector operator*(GammaVector a, double s) { return a *= s; }
  friend GammaVector operator*(double s, GammaVector a) { return a *= s; }
  bool operator==(const GammaVector&) const = default;

  double norm() const;
  Vec3 distribution() const { return {c[0], c[1], c[2]}; }
  Vec3 penalised() const { return {c[3], c[4], c[5]}; }
};

const Mat4& gamma_basis(int k);  // k = 0..5

Mat4 gamma_embed(const GammaVector& lambda);
GammaVector gamma_project(const Mat4& m);

/// Keeps the distribution part of the gamma projection.
Mat4 apply_P(const Mat4& m);
/// Keeps the penalised part of the gamma projection.
Mat4 apply_Q(const Mat4& m);
/// F_q = P + Q/q.  Throws std::invalid_argument for q <= 0.
Mat4 apply_Fq(const Mat4& m, double q);
/// F_q^{-1} = P + q Q on span(gamma).
Mat4 apply_Fq_inverse(const Mat4& m, double q);

/// Normalised trace Tr(m)/dim.
template <typename M>
cplx trace_norm(const M& m) {
  return m.trace() / static_cast<double>(m.rows());
}

/// Raised by mat_log when an eigenphase sits on the principal branch cut.
class BranchCutError : public std::runtime_error {
 public:
  explicit BranchCutError(const std::string& what) : std::runtime_error(what) {}
};

/// exp(A) for skew-Hermitian A, computed through the eigendecomposition of
/// the Hermitian matrix -iA so the result is unitary to rounding.
Mat2 mat_exp(const Mat2& a);
Mat4 mat_exp(const Mat4& a);

/// Principal logarithm of a unitary matrix (skew-Hermitian result).  Throws
/// BranchCutError if any eigenphase is within `guard` of +-pi.
Mat2 mat_log(const Mat2& u, double guard = 1e-10);
Mat4 mat_log(const Mat4& u, double guard = 1e-10);

/// exp(-i H t) for Hermitian H.
Mat2 expi_hermitian(const Mat2& h, double t);
Mat4 expi_hermitian(const Mat4& h, double t);

/// 1 - |Tr_norm(U1^dagger U2)|.
double infidelity(const Mat2& u1, const Mat2& u2);
double infidelity(const Mat4& u1, const Mat4& u2);

/// Uhlmann-Jozsa fidelity [Tr sqrt(sqrt(rho) sigma sqrt(rho))]^2, conventional
/// trace.  Throws std::invalid_argument if either input has an eigenvalue
/// below -1e-10.
double uj_fidelity(const Mat2& rho, const Mat2& sigma);

/// exp(-i u.sigma) with theta = |u|.
Mat2 target_from_axis(const Vec3& u);

/// Inverse of target_from_axis for SU(2) elements, theta in [0, pi].
/// Global phase is removed first, so e^{i phi} U maps to the same axis up to
/// the sign ambiguity of -I.
Vec3 axis_from_unitary(const Mat2& u);

/// Pauli coordinates (x, y, z) of a 2x2 Hermitian matrix (traceless part).
Vec3 pauli_coords(const Mat2& h);
Mat2 from_pauli(const Vec3& v);

/// Largest entry magnitude of U^dagger U - I.
double unitarity_error(const Mat2& u);
double unitarity_error(const Mat4& u);

Mat2 project_unitary(const Mat2& u);
Mat4 project_unitary(const Mat4& u);

}  // namespace cdd
