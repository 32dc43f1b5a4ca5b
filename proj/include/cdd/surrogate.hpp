#pragma once

// Fully connected regression network u (3) -> lambda (6) used to seed the
// costate search, with its training loop, k-fold cross-validation and the
// predict / refine / retrain augmentation cycle.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdd/algebra.hpp"
#include "cdd/geodesic.hpp"

namespace cdd {

struct DatasetRecord {
  Vec3 u{};
  GammaVector lambda;
  double infidelity = 0.0;
  /// Penalty of the flow lambda belongs to; infinity for the sub-Riemannian one.
  double q = kSubRiemannian;
  int grid_n = 0;
};

struct Dataset {
  std::vector<DatasetRecord> records;
  /// Indices into records reserved for testing.
  std::vector<std::size_t> test;
  std::vector<std::size_t> train;

  std::size_t size() const { return records.size(); }
  /// Shuffled split with round(fraction * n) test records.
  void split(double test_fraction, std::uint64_t seed);
  std::vector<DatasetRecord> subset(const std::vector<std::size_t>& idx) const;
};

/// Records with infidelity strictly below threshold.
std::vector<DatasetRecord> filter_admissible(const std::vector<DatasetRecord>& records, double threshold);

/// Returns the number of lines that failed to parse.
std::size_t read_dataset_jsonl(std::istream& is, std::vector<DatasetRecord>& out);
void write_record_jsonl(std::ostream& os, const DatasetRecord& r);

struct MlpSpec {
  std::vector<int> hidden{64, 64, 64, 64, 64};
  double dropout = 0.3;
  double l2 = 0.002;
};

class Mlp {
 public:
  Mlp() = default;
  /// Layers [3, hidden..., 6], He-initialised from rng.
  Mlp(const MlpSpec& spec, std::mt19937_64& rng);

  const MlpSpec& spec() const { return spec_; }
  std::vector<int> layer_sizes() const;

  /// Inference; dropout is off.  Applies the stored output scaling.
  GammaVector predict(const Vec3& u) const;
  /// Raw network output for a batch (columns are samples), no output scaling.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  /// Data term mean((forward(x) - y)^2) + l2 * sum(W^2).  The gradient is
  /// flattened in parameters() order.  `masks` (one per hidden layer, entries
  /// 0 or 1/(1-p)) applies dropout; pass nullptr for none.
  double loss_and_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Eigen::VectorXd* grad,
                           const std::vector<Eigen::MatrixXd>* masks = nullptr) const;

  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& p);
  std::size_t parameter_count() const;
  bool finite() const;

  /// lambda = mean + scale .* output.  Fitted by train().
  Eigen::VectorXd output_mean = Eigen::VectorXd::Zero(6);
  Eigen::VectorXd output_scale = Eigen::VectorXd::Ones(6);

  void save_json(std::ostream& os) const;
  /// Throws std::runtime_error on malformed input or if `expected` is given
  /// and the stored layer sizes differ.
  static Mlp load_json(std::istream& is, const std::optional<std::vector<int>>& expected = std::nullopt);

  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

 private:
  MlpSpec spec_;
};

struct TrainOptions {
  int epochs = 200;
  int batch = 32;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  /// Standardise targets per component before fitting.
  bool normalize_targets = true;
};

struct TrainHistory {
  std::vector<double> train_loss;       // MSE on the training rows, dropout off
  std::vector<double> validation_loss;  // empty without a validation set
  bool diverged = false;
};

/// Adam on mini-batches.  On a non-finite loss the last finite weights are
/// restored and training stops with diverged = true.
TrainHistory train(Mlp& model, const std::vector<DatasetRecord>& data, const TrainOptions& opt,
                   const std::vector<DatasetRecord>* validation = nullptr);

/// MSE of the model's scaled outputs against the records.
double mse(const Mlp& model, const std::vector<DatasetRecord>& data);

/// First epoch (1-based) after which the curve stays within rel_tol of its
/// running best for `window` epochs; nullopt if it keeps improving.
std::optional<int> plateau_epoch(const std::vector<double>& curve, int window = 30, double rel_tol = 0.01);

struct CrossValidation {
  std::vector<std::vector<std::size_t>> folds;
  std::vector<TrainHistory> histories;
  std::vector<double> mean_train;
  std::vector<double> mean_validation;
};

/// Deterministic fold assignment from seed.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k, std::uint64_t seed);
CrossValidation kfold_crossval(const MlpSpec& spec, const std::vector<DatasetRecord>& data, int k,
                               const TrainOptions& opt);

/// theta u_hat with u_hat uniform on the sphere and theta uniform in [0, pi].
std::vector<Vec3> generate_targets(int n, std::mt19937_64& rng);

GammaVector predict_costate(const Mlp& model, const Vec3& u);

struct SolveSettings {
  int grid_n = 200;
  NoiseParams noise{};
  JumpSchedule schedule{10.0, 500.0, 30};
  double tol = 1e-4;
  unsigned jobs = 1;
};

/// Full q-jumping solve per target; one record each, in input order.
std::vector<DatasetRecord> solve_targets(const std::vector<Vec3>& targets, const SolveSettings& s);

struct AugmentOptions {
  int batch = 100;
  double threshold = 5e-3;
  std::size_t target_size = 0;  // stop once the dataset reaches this size
  int max_rounds = 1;
  TrainOptions train{};
  MinimizeOptions minimize{};
  bool shoot = true;
};

struct AugmentReport {
  int rounds = 0;
  std::size_t admitted = 0;
  std::size_t rejected = 0;
  std::size_t failed = 0;
  std::vector<double> raw_infidelity;  // of the network predictions, per candidate
};

/// Predict, refine on the sub-Riemannian flow, admit below threshold, retrain.
/// Admitted records are appended to `dataset` (training side) and, if `sink`
/// is given, written to it as JSON lines.
AugmentReport augment(Mlp& model, Dataset& dataset, const AugmentOptions& opt, const SolveSettings& s,
                      std::mt19937_64& rng, std::ostream* sink = nullptr);

struct Histogram {
  std::vector<std::string> labels{"<1e-4", "[1e-4,1e-1)", "[1e-1,1]"};
  std::vector<double> fraction = std::vector<double>(3, 0.0);
  std::vector<double> infidelities;

  double lowest_bin() const { return fraction[1]; }
};

/// Buckets the sub-Riemannian infidelity of raw predictions.
Histogram evaluate_histogram(const Mlp& model, const std::vector<DatasetRecord>& data, const SolveSettings& s);

}  // namespace cdd
