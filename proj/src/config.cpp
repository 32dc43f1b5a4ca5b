#include "cdd/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cdd {

namespace pt = boost::property_tree;

namespace {

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& value) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return;
  std::istringstream ss(*node);
  T v{};
  ss >> v;
  if (ss.fail() || !(ss >> std::ws).eof()) throw std::runtime_error("config: cannot parse " + key + " = " + *node);
  value = v;
}

std::vector<int> parse_widths(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream is(item);
    int w = 0;
    if (!(is >> w) || !(is >> std::ws).eof()) throw std::runtime_error("config: bad width list " + s);
    out.push_back(w);
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::runtime_error(std::string("config: ") + e.what());
  }
  RunConfig c;
  read(tree, "noise.eta", c.noise.eta);
  read(tree, "noise.omega_c", c.noise.omega_c);
  read(tree, "noise.omega_T", c.noise.omega_T);
  read(tree, "noise.tau", c.noise.tau);
  read(tree, "grid.n", c.grid_n);
  read(tree, "schedule.q_in", c.schedule.q_in);
  read(tree, "schedule.q_max", c.schedule.q_max);
  read(tree, "schedule.n_it", c.schedule.n_it);
  read(tree, "tolerance.infidelity", c.tol);
  read(tree, "tolerance.admission", c.admission_threshold);
  read(tree, "synthesis.starts", c.starts);
  read(tree, "synthesis.start_spread", c.start_spread);
  read(tree, "synthesis.fidelity_floor", c.fidelity_floor);
  read(tree, "ampdamp.omega0", c.omega0);
  if (auto w = tree.get_optional<std::string>("surrogate.hidden")) c.mlp.hidden = parse_widths(*w);
  read(tree, "surrogate.dropout", c.mlp.dropout);
  read(tree, "surrogate.l2", c.mlp.l2);
  read(tree, "surrogate.epochs", c.train.epochs);
  read(tree, "surrogate.batch", c.train.batch);
  read(tree, "surrogate.lr", c.train.lr);
  read(tree, "surrogate.test_fraction", c.test_fraction);
  read(tree, "surrogate.kfold", c.kfold);
  read(tree, "dataset.grid_n", c.dataset_grid_n);
  read(tree, "dataset.q_in", c.dataset_schedule.q_in);
  read(tree, "dataset.q_max", c.dataset_schedule.q_max);
  read(tree, "dataset.n_it", c.dataset_schedule.n_it);
  read(tree, "dataset.augment_batch", c.augment_batch);
  read(tree, "dataset.target_size", c.augment_target);
  read(tree, "run.seed", c.seed);
  read(tree, "run.jobs", c.jobs);
  if (auto o = tree.get_optional<std::string>("run.out")) c.out = *o;
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path.string());
  return parse_config(f);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: " + key + " " + why);
  };
  noise.validate();
  if (grid_n < 100) fail("grid.n", "must be at least 100");
  if (dataset_grid_n < 100) fail("dataset.grid_n", "must be at least 100");
  schedule.validate();
  dataset_schedule.validate();
  if (!(tol > 0)) fail("tolerance.infidelity", "must be positive");
  if (!(admission_threshold > 0)) fail("tolerance.admission", "must be positive");
  if (starts < 1) fail("synthesis.starts", "must be at least 1");
  if (start_spread < 0) fail("synthesis.start_spread", "must be non-negative");
  if (!(omega0 > 0)) fail("ampdamp.omega0", "must be positive");
  if (mlp.hidden.empty()) fail("surrogate.hidden", "needs at least one layer");
  if (mlp.dropout < 0 || mlp.dropout >= 1) fail("surrogate.dropout", "must be in [0, 1)");
  if (mlp.l2 < 0) fail("surrogate.l2", "must be non-negative");
  if (train.epochs < 1 || train.batch < 1 || !(train.lr > 0)) fail("surrogate", "epochs, batch and lr must be positive");
  if (!(test_fraction >= 0 && test_fraction < 1)) fail("surrogate.test_fraction", "must be in [0, 1)");
  if (kfold < 2) fail("surrogate.kfold", "must be at least 2");
  if (augment_batch < 1) fail("dataset.augment_batch", "must be positive");
}

SynthesisSettings RunConfig::synthesis() const {
  SynthesisSettings s;
  s.grid_n = grid_n;
  s.schedule = schedule;
  s.tol = tol;
  s.starts = starts;
  s.start_spread = start_spread;
  s.seed = seed;
  s.fidelity_floor = fidelity_floor;
  s.jobs = jobs;
  return s;
}

SolveSettings RunConfig::dataset_solve() const {
  SolveSettings s;
  s.grid_n = dataset_grid_n;
  s.noise = noise;
  s.schedule = dataset_schedule;
  s.tol = tol;
  s.jobs = jobs;
  return s;
}

}  // namespace cdd
