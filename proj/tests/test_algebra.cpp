#include <doctest.h>

#include "cdd/algebra.hpp"
#include "cdd/gates.hpp"
#include "random.hpp"

using namespace cdd;
using namespace cdd::testing;

namespace {

Mat4 random_gamma_matrix(double sd = 1.0) { return gamma_embed(random_gamma(sd)); }

template <typename E>
double max_abs(const Eigen::MatrixBase<E>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("gamma basis is orthonormal under the normalised trace") {
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const cplx ip = trace_norm(gamma_basis(i) * gamma_basis(j));
      CHECK(std::abs(ip - cplx(i == j ? 1.0 : 0.0)) < 1e-15);
    }
  }
}

TEST_CASE("embed and project are inverse") {
  for (int k = 0; k < 1000; ++k) {
    const GammaVector g = random_gamma(3.0);
    const GammaVector back = gamma_project(gamma_embed(g));
    CHECK((back - g).norm() < 1e-13);
  }
}

TEST_CASE("P and Q are complementary projectors on span(gamma)") {
  for (int k = 0; k < 1000; ++k) {
    const Mat4 m = random_gamma_matrix(2.0);
    CHECK(max_abs(apply_P(m) + apply_Q(m) - m) < 1e-13);
    CHECK(max_abs(apply_P(apply_P(m)) - apply_P(m)) < 1e-13);
    CHECK(max_abs(apply_Q(apply_Q(m)) - apply_Q(m)) < 1e-13);
    CHECK(max_abs(apply_P(apply_Q(m))) < 1e-13);
  }
}

TEST_CASE("F_q inverse round trip") {
  for (int k = 0; k < 1000; ++k) {
    const Mat4 m = random_gamma_matrix();
    const double q = std::pow(10.0, uniform(-2.0, 6.0));
    const Mat4 back = apply_Fq_inverse(apply_Fq(m, q), q);
    CHECK(max_abs(back - m) <= 1e-12 * std::max(1.0, q));
  }
  CHECK_THROWS_AS(apply_Fq(Mat4::Identity(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_Fq(Mat4::Identity(), -1.0), std::invalid_argument);
}

TEST_CASE("span(gamma) is closed under the commutator") {
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const Mat4 c = cplx(0.0, -1.0) * (gamma_basis(i) * gamma_basis(j) - gamma_basis(j) * gamma_basis(i));
      CHECK(max_abs(gamma_embed(gamma_project(c)) - c) < 1e-14);
    }
  }
  for (int k = 0; k < 1000; ++k) {
    const Mat4 a = random_gamma_matrix(), b = random_gamma_matrix();
    const Mat4 c = cplx(0.0, -1.0) * (a * b - b * a);
    CHECK(max_abs(gamma_embed(gamma_project(c)) - c) < 1e-12);
  }
}

TEST_CASE("mat_exp and mat_log round trip") {
  for (int k = 0; k < 1000; ++k) {
    // eigenvalues of a small Hermitian matrix stay inside (-pi, pi)
    const Mat2 h2 = random_hermitian<2>(0.4);
    const Mat2 a2 = cplx(0.0, -1.0) * h2;
    const Mat2 u2 = mat_exp(a2);
    CHECK(unitarity_error(u2) < 1e-14);
    CHECK(max_abs(mat_log(u2) - a2) < 1e-12);

    const Mat4 h4 = random_hermitian<4>(0.3);
    const Mat4 a4 = cplx(0.0, -1.0) * h4;
    const Mat4 u4 = mat_exp(a4);
    CHECK(unitarity_error(u4) < 1e-14);
    CHECK(max_abs(mat_log(u4) - a4) < 1e-12);
    CHECK(max_abs(mat_exp(mat_log(u4)) - u4) < 1e-12);
  }
}

TEST_CASE("mat_log refuses eigenphases on the branch cut") {
  CHECK_THROWS_AS(mat_log(Mat2(-Mat2::Identity())), BranchCutError);
  CHECK_NOTHROW(mat_log(Mat2(cplx(0, 1) * pauli(0))));
}

TEST_CASE("axis-angle map round trip") {
  for (int k = 0; k < 1000; ++k) {
    const Vec3 u = random_axis(M_PI - 1e-3);
    const Mat2 target = target_from_axis(u);
    const Vec3 back = axis_from_unitary(target);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(back[i] - u[i]) < 1e-10);
    // phases within (-pi/2, pi/2) are removed exactly; beyond that the
    // SU(2) representative flips sign and only the gate is recovered
    const Vec3 phased = axis_from_unitary(std::polar(1.0, uniform(-1.5, 1.5)) * target);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(phased[i] - u[i]) < 1e-9);
    CHECK(infidelity(target_from_axis(axis_from_unitary(Mat2(-target))), target) < 1e-12);
  }
}

TEST_CASE("pauli coordinates") {
  for (int k = 0; k < 100; ++k) {
    const Vec3 v = random_vec3();
    const Vec3 back = pauli_coords(from_pauli(v));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(back[i] - v[i]) < 1e-14);
  }
  CHECK(pauli_coords(Mat2::Identity())[2] == doctest::Approx(0.0));
}

TEST_CASE("infidelity ignores global phase and detects distinct gates") {
  for (int k = 0; k < 200; ++k) {
    const Mat2 u = target_from_axis(random_axis(3.0));
    CHECK(infidelity(u, Mat2(std::polar(1.0, uniform(-3.0, 3.0)) * u)) < 1e-14);
  }
  CHECK(infidelity(identity2(), pauli(0)) == doctest::Approx(1.0));
  CHECK(infidelity(identity4(), identity4()) == doctest::Approx(0.0));
}

TEST_CASE("Uhlmann-Jozsa fidelity reduces to the overlap for pure states") {
  for (int k = 0; k < 200; ++k) {
    const Mat2 a = random_pure_state(), b = random_pure_state();
    CHECK(uj_fidelity(a, b) == doctest::Approx((a * b).trace().real()).epsilon(1e-9));
  }
  const Mat2 mixed = 0.5 * identity2();
  CHECK(uj_fidelity(mixed, mixed) == doctest::Approx(1.0));
  Mat2 bad = identity2();
  bad(1, 1) = -0.5;
  CHECK_THROWS_AS(uj_fidelity(bad, mixed), std::invalid_argument);
}

TEST_CASE("projection to the nearest unitary") {
  for (int k = 0; k < 200; ++k) {
    const Mat4 u = mat_exp(Mat4(cplx(0, -1) * random_hermitian<4>()));
    Mat4 noisy = u;
    noisy(0, 1) += 1e-6;
    CHECK(unitarity_error(project_unitary(noisy)) < 1e-14);
    CHECK(max_abs(project_unitary(noisy) - u) < 1e-5);
  }
}

TEST_CASE("library gates reproduce their matrices up to phase") {
  REQUIRE(gate_library().size() == 4);
  for (const auto& g : gate_library()) {
    INFO(g.name);
    CHECK(infidelity(target_from_axis(g.u), g.matrix) < 1e-12);
  }
  CHECK(find_gate("h")->name == "Hadamard");
  CHECK(find_gate("IDENTITY")->name == "Identity");
  CHECK(find_gate("id")->name == "Identity");
  CHECK_FALSE(find_gate("cnot").has_value());
}
