#include <doctest.h>

#include <sstream>

#include "cdd/config.hpp"
#include "cdd/io.hpp"
#include "cdd/synthesis.hpp"

using namespace cdd;

TEST_CASE("solution document round trip") {
  const NoiseTable noise(NoiseParams{}, 100);
  const Vec3 u{0.1, -0.4, 0.8};
  const Mat2 target = target_from_axis(u);
  const GeodesicSolution sol = propagate_sub(GammaVector{{0.1, -0.4, 0.8, 0.0, 0.3, -2.0}}, noise, &target);
  const SolutionDocument doc = make_document(sol, u, 2000.0);
  CHECK(doc.grid_n == 100);
  CHECK(std::isinf(doc.q));
  CHECK(doc.infidelity == sol.achieved_infidelity);

  std::stringstream ss;
  write_solution_json(ss, doc);
  CHECK(ss.str().find("\"inf\"") != std::string::npos);
  const SolutionDocument back = read_solution_json(ss);
  CHECK(back.u == doc.u);
  CHECK((back.lambda0 - doc.lambda0).norm() < 1e-15);
  CHECK(std::isinf(back.q));
  CHECK(back.q_max == 2000.0);
  CHECK(back.energy == doctest::Approx(doc.energy));
  REQUIRE(back.control.size() == 101);
  CHECK(back.control.wy[50] == doctest::Approx(doc.control.wy[50]));
}

TEST_CASE("solution schema problems are reported") {
  std::stringstream missing(R"({"u": [0, 0, 0]})");
  CHECK_THROWS_AS(read_solution_json(missing), std::runtime_error);
  std::stringstream broken("{ not json");
  CHECK_THROWS_AS(read_solution_json(broken), std::runtime_error);

  const NoiseTable noise(NoiseParams{}, 10);
  const GeodesicSolution sol = propagate_sub(GammaVector{}, noise);
  SolutionDocument doc = make_document(sol, {0, 0, 0}, 10.0);
  doc.grid_n = 11;
  std::stringstream ss;
  write_solution_json(ss, doc);
  CHECK_THROWS_AS(read_solution_json(ss), std::runtime_error);
}

TEST_CASE("control csv") {
  std::ostringstream os;
  write_control_csv(os, ControlField::constant({1, 2, 3}, 2));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,wx,wy,wz");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("config defaults and overrides") {
  std::istringstream empty("");
  const RunConfig d = parse_config(empty);
  CHECK(d.grid_n == 1000);
  CHECK(d.schedule.q_max == 2000.0);
  CHECK(d.noise.eta == 0.34);

  std::istringstream is(R"(
[noise]
eta = 0.2
omega_T = 1.5

[grid]
n = 400

[schedule]
q_max = 500
n_it = 30

[surrogate]
hidden = 32, 32, 16
dropout = 0.1

[run]
seed = 42
out = results
)");
  const RunConfig c = parse_config(is);
  CHECK(c.noise.eta == 0.2);
  CHECK(c.noise.omega_T == 1.5);
  CHECK(c.grid_n == 400);
  CHECK(c.schedule.q_max == 500.0);
  CHECK(c.schedule.n_it == 30);
  CHECK(c.mlp.hidden == std::vector<int>{32, 32, 16});
  CHECK(c.mlp.dropout == 0.1);
  CHECK(c.seed == 42);
  CHECK(c.out == "results");
  CHECK(c.synthesis().grid_n == 400);
  CHECK(c.dataset_solve().noise.eta == 0.2);
}

TEST_CASE("config errors") {
  std::istringstream bad_number("[grid]\nn = lots\n");
  CHECK_THROWS_AS(parse_config(bad_number), std::runtime_error);
  std::istringstream bad_widths("[surrogate]\nhidden = 32, x\n");
  CHECK_THROWS_AS(parse_config(bad_widths), std::runtime_error);
  std::istringstream small_grid("[grid]\nn = 10\n");
  CHECK_THROWS_AS(parse_config(small_grid), std::invalid_argument);
  std::istringstream bad_schedule("[schedule]\nq_in = 100\nq_max = 10\n");
  CHECK_THROWS_AS(parse_config(bad_schedule), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), std::runtime_error);
}

TEST_CASE("candidate selection") {
  std::vector<SynthesisCandidate> c(4);
  c[0] = {0, {}, 1e-6, 4.6, 0.988};
  c[1] = {1, {}, 1e-6, 17.0, 0.998};
  c[2] = {2, {}, 1e-6, 39.0, 0.999};
  c[3] = {3, {}, 5e-3, 2.0, 0.999};
  // cheapest converged candidate above the floor
  CHECK(select_candidate(c, 1e-4, 0.99) == 1);
  // floor disabled: cheapest converged
  CHECK(select_candidate(c, 1e-4, 0.0) == 0);
  // nothing clears the floor: most protective converged
  CHECK(select_candidate(c, 1e-4, 0.9995) == 2);
  // nothing converged: lowest infidelity
  for (auto& x : c) x.infidelity = 1.0;
  c[3].infidelity = 0.5;
  CHECK(select_candidate(c, 1e-4, 0.99) == 3);
  CHECK_THROWS_AS(select_candidate({}, 1e-4, 0.99), std::invalid_argument);
}
