#include "cdd/io.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "cdd/simulator.hpp"

namespace cdd {

using nlohmann::json;

SolutionDocument make_document(const GeodesicSolution& sol, const Vec3& u, double q_max) {
  SolutionDocument d;
  d.u = u;
  d.lambda0 = sol.costate0;
  d.q = sol.q;
  d.q_max = q_max;
  d.infidelity = sol.achieved_infidelity;
  d.grid_n = static_cast<int>(sol.t.size()) - 1;
  d.control = sol.control;
  d.energy = energy_cost(sol.control);
  return d;
}

void write_solution_json(std::ostream& os, const SolutionDocument& d) {
  json j;
  j["u"] = d.u;
  j["lambda0"] = d.lambda0.c;
  if (std::isinf(d.q)) {
    j["q"] = "inf";
  } else {
    j["q"] = d.q;
  }
  j["q_max"] = d.q_max;
  j["infidelity"] = d.infidelity;
  j["grid_n"] = d.grid_n;
  j["energy"] = d.energy;
  j["control"] = {{"t", d.control.t}, {"wx", d.control.wx}, {"wy", d.control.wy}, {"wz", d.control.wz}};
  os << std::setw(1) << j << '\n';
}

SolutionDocument read_solution_json(std::istream& is) {
  SolutionDocument d;
  try {
    json j;
    is >> j;
    d.u = j.at("u").get<Vec3>();
    d.lambda0.c = j.at("lambda0").get<std::array<double, 6>>();
    const json& q = j.at("q");
    if (q.is_string()) {
      if (q.get<std::string>() != "inf") throw std::runtime_error("q must be a number or \"inf\"");
      d.q = kSubRiemannian;
    } else {
      d.q = q.get<double>();
    }
    d.q_max = j.at("q_max").get<double>();
    d.infidelity = j.at("infidelity").get<double>();
    d.grid_n = j.at("grid_n").get<int>();
    d.energy = j.value("energy", 0.0);
    const json& c = j.at("control");
    d.control.t = c.at("t").get<std::vector<double>>();
    d.control.wx = c.at("wx").get<std::vector<double>>();
    d.control.wy = c.at("wy").get<std::vector<double>>();
    d.control.wz = c.at("wz").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("solution file: ") + e.what());
  }
  try {
    d.control.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("solution file: ") + e.what());
  }
  if (d.control.steps() != d.grid_n) throw std::runtime_error("solution file: grid_n does not match control grid");
  return d;
}

void write_control_csv(std::ostream& os, const ControlField& f) {
  os << "t,wx,wy,wz\n" << std::setprecision(12);
  for (std::size_t i = 0; i < f.size(); ++i) os << f.t[i] << ',' << f.wx[i] << ',' << f.wy[i] << ',' << f.wz[i] << '\n';
}

}  // namespace cdd
