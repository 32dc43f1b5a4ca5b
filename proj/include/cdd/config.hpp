#pragma once

// Run configuration read from a `[section] key = value` file.  Every key is
// optional; missing keys keep the defaults below.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "cdd/noise.hpp"
#include "cdd/surrogate.hpp"
#include "cdd/synthesis.hpp"

namespace cdd {

struct RunConfig {
  NoiseParams noise{};
  int grid_n = 1000;
  JumpSchedule schedule{10.0, 2000.0, 100};
  double tol = 1e-4;
  double admission_threshold = 5e-3;

  int starts = 8;
  double start_spread = 4.0;
  double fidelity_floor = 0.99;

  double omega0 = 0.6283185307179586;

  MlpSpec mlp{};
  TrainOptions train{};
  double test_fraction = 1.0 / 3.0;
  int kfold = 4;
  int dataset_grid_n = 200;
  JumpSchedule dataset_schedule{10.0, 500.0, 30};
  int augment_batch = 100;
  std::size_t augment_target = 6000;

  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::filesystem::path out = "out";

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;

  SynthesisSettings synthesis() const;
  SolveSettings dataset_solve() const;
};

/// Throws std::runtime_error on syntax errors or unparsable values.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace cdd
