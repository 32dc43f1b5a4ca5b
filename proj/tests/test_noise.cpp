#include <doctest.h>

#include "cdd/noise.hpp"
#include "cdd/special_functions.hpp"

using namespace cdd;
using doctest::Approx;
using std::complex;

// Reference values computed with mpmath at 30 digits.

TEST_CASE("log_gamma real part") {
  CHECK(special::log_gamma({0.3, 0.0}).real() == Approx(1.0957979948180755606).epsilon(1e-13));
  CHECK(special::log_gamma({1.5, 2.0}).real() == Approx(-1.4991963725850954884).epsilon(1e-13));
  CHECK(special::log_gamma({1.2, -0.7}).real() == Approx(-0.36884835604870674883).epsilon(1e-13));
  CHECK(special::log_gamma({-2.3, 0.4}).real() == Approx(-0.40520869521992327572).epsilon(1e-12));
  CHECK(special::log_gamma({12.0, 5.0}).real() == Approx(16.447817227941699624).epsilon(1e-13));
  CHECK(special::log_gamma({0.5, 30.0}).real() == Approx(-46.204951270642225835).epsilon(1e-13));
}

TEST_CASE("digamma") {
  auto close = [](complex<double> a, complex<double> b) { return std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(b)); };
  CHECK(close(special::digamma({0.3, 0.0}), {-3.5025242222001331249, 0.0}));
  CHECK(close(special::digamma({1.5, 2.0}), {0.79983375817295367991, 1.1001971357298586774}));
  CHECK(close(special::digamma({1.2, -0.7}), {-0.0041233123485766631027, -0.74519343332962819126}));
  CHECK(close(special::digamma({-2.3, 0.4}), {1.5027339464469229428, 2.8132330424083262341}));
  CHECK(close(special::digamma({12.0, 5.0}), {2.5290991869585883766, 0.40993385571577948503}));
  CHECK(close(special::digamma({0.5, 30.0}), {3.4011510763585218379, 1.5707963267948966192}));
  CHECK(special::digamma({1.0, 0.0}).real() == Approx(-special::kEulerGamma).epsilon(1e-14));
}

TEST_CASE("trigamma") {
  auto close = [](complex<double> a, complex<double> b) { return std::abs(a - b) < 1e-12 * std::max(1.0, std::abs(b)); };
  CHECK(close(special::trigamma({0.3, 0.0}), {12.245364546107731301, 0.0}));
  CHECK(close(special::trigamma({1.5, 2.0}), {0.20768129364622223257, -0.40089451458948371832}));
  CHECK(close(special::trigamma({1.2, -0.7}), {0.75247788549491323617, 0.64691127727268459927}));
  CHECK(close(special::trigamma({-2.3, 0.4}), {1.0081944015594955204, 2.6576604387562655812}));
  CHECK(close(special::trigamma({12.0, 5.0}), {0.073117802738768812911, -0.031756750423988537453}));
  CHECK(close(special::trigamma({0.5, 30.0}), {0.0, -0.033336420954417115572}));
  CHECK(special::trigamma({1.0, 0.0}).real() == Approx(M_PI * M_PI / 6).epsilon(1e-14));
}

TEST_CASE("coherence factor at the gate defaults") {
  const NoiseParams p = NoiseParams::gate_defaults();
  CHECK(mu(0.0, p) == 1.0);
  CHECK(mu(0.1, p) == Approx(0.99387774976458839512).epsilon(1e-12));
  CHECK(mu(0.5, p) == Approx(0.86067886993420281564).epsilon(1e-12));
  CHECK(mu(1.0, p) == Approx(0.5687808661558248067).epsilon(1e-12));
  CHECK(mu_dot(0.1, p) == Approx(-0.12194731434102821899).epsilon(1e-11));
  CHECK(mu_dot(0.5, p) == Approx(-0.50464495413217989113).epsilon(1e-11));
  CHECK(mu_dot(1.0, p) == Approx(-0.59450980419409939027).epsilon(1e-11));
  CHECK(h_of_t(0.1, p) == Approx(-0.55187083436732886374).epsilon(1e-10));
  CHECK(h_of_t(0.5, p) == Approx(-0.49557767332544168938).epsilon(1e-10));
  CHECK(h_of_t(1.0, p) == Approx(-0.36140892399699272973).epsilon(1e-10));
}

TEST_CASE("lambda0 equals C(0) and sets the small-t limit of h") {
  const NoiseParams p = NoiseParams::gate_defaults();
  CHECK(lambda0(p) == Approx(0.30736125949932910492).epsilon(1e-13));
  CHECK(correlation(0.0, p).real() == Approx(lambda0(p)).epsilon(1e-14));
  CHECK(h_of_t(0.0, p) == Approx(-std::sqrt(lambda0(p))).epsilon(1e-14));
  CHECK(h_of_t(1e-3, p) == Approx(-0.55440145921950613).epsilon(1e-8));
}

TEST_CASE("mu_dot is the derivative of mu") {
  const NoiseParams p{0.2, 0.9, 0.4, 1.0};
  for (double t : {0.05, 0.3, 0.77, 1.0}) {
    const double d = 1e-6;
    const double fd = (mu(t + d, p) - mu(t - d, p)) / (2 * d);
    CHECK(mu_dot(t, p) == Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("correlation ratio limits") {
  NoiseParams p;
  const double tc = p.correlation_time();
  CHECK(std::abs(std::abs(correlation_ratio(tc, p)) - 0.025) <= 0.005);
  p.omega_T = 1e-3 * p.omega_c;
  CHECK(std::abs(std::abs(correlation_ratio(1.0 / p.omega_c, p)) - 0.5) <= 1e-2);
  p.omega_T = 1e3 * p.omega_c;
  CHECK(std::abs(std::abs(correlation_ratio(1.0 / p.omega_c, p)) - 0.5) <= 1e-2);
}

TEST_CASE("zero coupling is noiseless") {
  const NoiseParams p = NoiseParams::noiseless();
  CHECK(mu(0.7, p) == 1.0);
  CHECK(h_of_t(0.7, p) == 0.0);
  CHECK(drift_hamiltonian(0.3, p).isZero());
}

TEST_CASE("parameter validation") {
  NoiseParams p;
  p.eta = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.omega_c = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = {};
  p.tau = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(NoiseTable(NoiseParams{}, 0), std::invalid_argument);
}

TEST_CASE("noise table samples h on the grid") {
  const NoiseParams p;
  const NoiseTable tab(p, 100);
  CHECK(tab.dt() == Approx(0.01));
  CHECK(tab.h_at(37) == Approx(h_of_t(0.37, p)).epsilon(1e-12));
  CHECK(tab.mu_at(100) == Approx(mu(1.0, p)).epsilon(1e-12));
  CHECK(std::abs(tab.correlation_lag(5) - correlation(0.05, p)) < 1e-13);
  CHECK(tab.h(0.375) == Approx(0.5 * (h_of_t(0.37, p) + h_of_t(0.38, p))).epsilon(1e-12));
}
