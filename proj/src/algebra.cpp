#include "cdd/algebra.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cdd {

namespace {

std::array<Mat2, 3> make_paulis() {
  Mat2 x, y, z;
  x << 0, 1, 1, 0;
  y << 0, -kI, kI, 0;
  z << 1, 0, 0, -1;
  return {x, y, z};
}

std::array<Mat4, 6> make_gamma() {
  std::array<Mat4, 6> g;
  for (int k = 0; k < 3; ++k) {
    g[k] = kron(pauli(k), identity2());
    g[k + 3] = kron(pauli(k), pauli(2));
  }
  return g;
}

template <typename M>
M exp_from_hermitian(const M& h, double t) {
  Eigen::SelfAdjointEigenSolver<M> es(h);
  const auto& v = es.eigenvectors();
  auto d = es.eigenvalues();
  M phases = M::Zero();
  for (int i = 0; i < d.size(); ++i) phases(i, i) = std::exp(-kI * d(i) * t);
  return v * phases * v.adjoint();
}

template <typename M>
M log_unitary(const M& u, double guard) {
  Eigen::ComplexSchur<M> schur(u);
  const M& t = schur.matrixT();
  const M& z = schur.matrixU();
  M d = M::Zero();
  for (int i = 0; i < u.rows(); ++i) {
    const double phase = std::arg(t(i, i));
    if (std::numbers::pi - std::abs(phase) < guard) {
      throw BranchCutError("mat_log: eigenphase on the branch cut (" + std::to_string(phase) + ")");
    }
    d(i, i) = kI * phase;
  }
  M out = z * d * z.adjoint();
  return 0.5 * (out - out.adjoint());
}

template <typename M>
double unitarity_err(const M& u) {
  return (u.adjoint() * u - M::Identity()).cwiseAbs().maxCoeff();
}

template <typename M>
M polar_factor(const M& u) {
  Eigen::JacobiSVD<M> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

const Mat2& pauli(int k) {
  static const auto p = make_paulis();
  return p.at(static_cast<std::size_t>(k));
}

Mat2 identity2() { return Mat2::Identity(); }
Mat4 identity4() { return Mat4::Identity(); }

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

GammaVector& GammaVector::operator+=(const GammaVector& o) {
  for (std::size_t i = 0; i < 6; ++i) c[i] += o.c[i];
  return *this;
}

GammaVector& GammaVector::operator-=(const GammaVector& o) {
  for (std::size_t i = 0; i < 6; ++i) c[i] -= o.c[i];
  return *this;
}

GammaVector& GammaVector::operator*=(double s) {
  for (auto& x : c) x *= s;
  return *this;
}

double GammaVector::norm() const {
  double s = 0;
  for (double x : c) s += x * x;
  return std::sqrt(s);
}

const Mat4& gamma_basis(int k) {
  static const auto g = make_gamma();
  return g.at(static_cast<std::size_t>(k));
}

Mat4 gamma_embed(const GammaVector& lambda) {
  Mat4 m = Mat4::Zero();
  for (int k = 0; k < 6; ++k) m += lambda[k] * gamma_basis(k);
  return m;
}

GammaVector gamma_project(const Mat4& m) {
  GammaVector out;
  for (int k = 0; k < 6; ++k) out[k] = trace_norm(Mat4(m * gamma_basis(k))).real();
  return out;
}

Mat4 apply_P(const Mat4& m) {
  auto l = gamma_project(m);
  l[3] = l[4] = l[5] = 0.0;
  return gamma_embed(l);
}

Mat4 apply_Q(const Mat4& m) {
  auto l = gamma_project(m);
  l[0] = l[1] = l[2] = 0.0;
  return gamma_embed(l);
}

Mat4 apply_Fq(const Mat4& m, double q) {
  if (!(q > 0)) throw std::invalid_argument("apply_Fq: q must be positive");
  auto l = gamma_project(m);
  for (int k = 3; k < 6; ++k) l[k] /= q;
  return gamma_embed(l);
}

Mat4 apply_Fq_inverse(const Mat4& m, double q) {
  if (!(q > 0)) throw std::invalid_argument("apply_Fq_inverse: q must be positive");
  auto l = gamma_project(m);
  for (int k = 3; k < 6; ++k) l[k] *= q;
  return gamma_embed(l);
}

Mat2 mat_exp(const Mat2& a) { return exp_from_hermitian<Mat2>(kI * a, 1.0); }
Mat4 mat_exp(const Mat4& a) { return exp_from_hermitian<Mat4>(kI * a, 1.0); }

Mat2 mat_log(const Mat2& u, double guard) { return log_unitary(u, guard); }
Mat4 mat_log(const Mat4& u, double guard) { return log_unitary(u, guard); }

Mat2 expi_hermitian(const Mat2& h, double t) { return exp_from_hermitian(h, t); }
Mat4 expi_hermitian(const Mat4& h, double t) { return exp_from_hermitian(h, t); }

double infidelity(const Mat2& u1, const Mat2& u2) {
  return 1.0 - std::abs(trace_norm(Mat2(u1.adjoint() * u2)));
}

double infidelity(const Mat4& u1, const Mat4& u2) {
  return 1.0 - std::abs(trace_norm(Mat4(u1.adjoint() * u2)));
}

double uj_fidelity(const Mat2& rho, const Mat2& sigma) {
  auto check_psd = [](const Mat2& m, const char* name) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::invalid_argument(std::string("uj_fidelity: ") + name + " is not PSD");
  };
  check_psd(rho, "rho");
  check_psd(sigma, "sigma");
  // closed form for 2x2: Tr(rho sigma) + 2 sqrt(det rho det sigma); no square
  // roots of rank-deficient matrices, so pure states stay exact
  const double overlap = (rho * sigma).trace().real();
  const double dets = std::max(rho.determinant().real(), 0.0) * std::max(sigma.determinant().real(), 0.0);
  return overlap + 2.0 * std::sqrt(dets);
}

Mat2 target_from_axis(const Vec3& u) {
  const double theta = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  Mat2 out = std::cos(theta) * identity2();
  if (theta == 0.0) return out;
  const double s = std::sin(theta) / theta;
  for (int k = 0; k < 3; ++k) out -= kI * (s * u[k]) * pauli(k);
  return out;
}

Vec3 axis_from_unitary(const Mat2& u) {
  const cplx det = u.determinant();
  const Mat2 su = u * std::exp(-0.5 * kI * std::arg(det));
  double a = 0.5 * su.trace().real();
  Vec3 b{};
  for (int k = 0; k < 3; ++k) b[k] = (0.5 * kI * Mat2(su * pauli(k)).trace()).real();
  const double s = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
  if (s == 0.0) return {0.0, 0.0, a >= 0 ? 0.0 : std::numbers::pi};
  const double theta = std::atan2(s, a);
  return {theta * b[0] / s, theta * b[1] / s, theta * b[2] / s};
}

Vec3 pauli_coords(const Mat2& h) {
  return {0.5 * (h(0, 1) + h(1, 0)).real(), 0.5 * (h(1, 0) - h(0, 1)).imag(),
          0.5 * (h(0, 0) - h(1, 1)).real()};
}

Mat2 from_pauli(const Vec3& v) {
  Mat2 m;
  m << v[2], cplx(v[0], -v[1]), cplx(v[0], v[1]), -v[2];
  return m;
}

double unitarity_error(const Mat2& u) { return unitarity_err(u); }
double unitarity_error(const Mat4& u) { return unitarity_err(u); }

Mat2 project_unitary(const Mat2& u) { return polar_factor(u); }
Mat4 project_unitary(const Mat4& u) { return polar_factor(u); }

}  // namespace cdd
