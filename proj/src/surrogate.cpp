#include "cdd/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "cdd/parallel.hpp"

namespace cdd {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

// ---------------------------------------------------------------- dataset

void Dataset::split(double test_fraction, std::uint64_t seed) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
  test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
}

std::vector<DatasetRecord> Dataset::subset(const std::vector<std::size_t>& idx) const {
  std::vector<DatasetRecord> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(records.at(i));
  return out;
}

std::vector<DatasetRecord> filter_admissible(const std::vector<DatasetRecord>& records, double threshold) {
  std::vector<DatasetRecord> out;
  for (const auto& r : records) {
    if (r.infidelity < threshold) out.push_back(r);
  }
  return out;
}

void write_record_jsonl(std::ostream& os, const DatasetRecord& r) {
  json j;
  j["u"] = r.u;
  j["lambda"] = r.lambda.c;
  j["infidelity"] = r.infidelity;
  if (std::isinf(r.q)) {
    j["q"] = "inf";
  } else {
    j["q"] = r.q;
  }
  j["grid_n"] = r.grid_n;
  os << j.dump() << '\n';
}

std::size_t read_dataset_jsonl(std::istream& is, std::vector<DatasetRecord>& out) {
  std::size_t bad = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      DatasetRecord r;
      r.u = j.at("u").get<Vec3>();
      r.lambda.c = j.at("lambda").get<std::array<double, 6>>();
      r.infidelity = j.at("infidelity").get<double>();
      const json& q = j.at("q");
      r.q = q.is_string() ? (q.get<std::string>() == "inf" ? kSubRiemannian : throw std::runtime_error("q"))
                          : q.get<double>();
      r.grid_n = j.value("grid_n", 0);
      bool ok = std::isfinite(r.infidelity);
      for (double v : r.u) ok = ok && std::isfinite(v);
      for (double v : r.lambda.c) ok = ok && std::isfinite(v);
      if (!ok) throw std::runtime_error("non-finite field");
      out.push_back(r);
    } catch (const std::exception&) {
      ++bad;
    }
  }
  return bad;
}

// ---------------------------------------------------------------- network

namespace {

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

MatrixXd inputs(const std::vector<DatasetRecord>& data) {
  MatrixXd x(3, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int k = 0; k < 3; ++k) x(k, static_cast<Eigen::Index>(i)) = data[i].u[static_cast<std::size_t>(k)];
  }
  return x;
}

MatrixXd targets(const std::vector<DatasetRecord>& data) {
  MatrixXd y(6, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (int k = 0; k < 6; ++k) y(k, static_cast<Eigen::Index>(i)) = data[i].lambda[static_cast<std::size_t>(k)];
  }
  return y;
}

MatrixXd normalise(const MatrixXd& y, const Mlp& m) {
  return (y.colwise() - m.output_mean).array().colwise() / m.output_scale.array();
}

}  // namespace

Mlp::Mlp(const MlpSpec& spec, std::mt19937_64& rng) : spec_(spec) {
  if (spec.dropout < 0 || spec.dropout >= 1) throw std::invalid_argument("Mlp: dropout must be in [0, 1)");
  std::vector<int> sizes = layer_sizes();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l + 1] < 1) throw std::invalid_argument("Mlp: layer widths must be positive");
    std::normal_distribution<double> nd(0.0, std::sqrt(2.0 / sizes[l]));
    MatrixXd w(sizes[l + 1], sizes[l]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = nd(rng);
    weights.push_back(w);
    biases.push_back(VectorXd::Zero(sizes[l + 1]));
  }
}

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> s{3};
  s.insert(s.end(), spec_.hidden.begin(), spec_.hidden.end());
  s.push_back(6);
  return s;
}

MatrixXd Mlp::forward(const MatrixXd& x) const {
  MatrixXd a = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    MatrixXd z = (weights[l] * a).colwise() + biases[l];
    a = (l + 1 < weights.size()) ? relu(z) : z;
  }
  return a;
}

GammaVector Mlp::predict(const Vec3& u) const {
  MatrixXd x(3, 1);
  x << u[0], u[1], u[2];
  const VectorXd out = forward(x).col(0).cwiseProduct(output_scale) + output_mean;
  GammaVector g;
  for (int k = 0; k < 6; ++k) g[static_cast<std::size_t>(k)] = out(k);
  return g;
}

double Mlp::loss_and_gradient(const MatrixXd& x, const MatrixXd& y, VectorXd* grad,
                              const std::vector<MatrixXd>* masks) const {
  const std::size_t n_layers = weights.size();
  std::vector<MatrixXd> act{x};  // act[l] feeds layer l
  std::vector<MatrixXd> pre;
  for (std::size_t l = 0; l < n_layers; ++l) {
    MatrixXd z = (weights[l] * act.back()).colwise() + biases[l];
    pre.push_back(z);
    if (l + 1 < n_layers) {
      MatrixXd a = relu(z);
      if (masks) a = a.cwiseProduct((*masks)[l]);
      act.push_back(a);
    }
  }
  const MatrixXd diff = pre.back() - y;
  const double count = static_cast<double>(diff.size());
  double loss = diff.squaredNorm() / count;
  for (const auto& w : weights) loss += spec_.l2 * w.squaredNorm();
  if (!grad) return loss;

  grad->resize(static_cast<Eigen::Index>(parameter_count()));
  std::vector<MatrixXd> dw(n_layers);
  std::vector<VectorXd> db(n_layers);
  MatrixXd delta = 2.0 * diff / count;
  for (std::size_t l = n_layers; l-- > 0;) {
    dw[l] = delta * act[l].transpose() + 2.0 * spec_.l2 * weights[l];
    db[l] = delta.rowwise().sum();
    if (l == 0) break;
    MatrixXd back = weights[l].transpose() * delta;
    back = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    if (masks) back = back.cwiseProduct((*masks)[l - 1]);
    delta = back;
  }
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    grad->segment(off, dw[l].size()) = Eigen::Map<const VectorXd>(dw[l].data(), dw[l].size());
    off += dw[l].size();
    grad->segment(off, db[l].size()) = db[l];
    off += db[l].size();
  }
  return loss;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

VectorXd Mlp::parameters() const {
  VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    p.segment(off, weights[l].size()) = Eigen::Map<const VectorXd>(weights[l].data(), weights[l].size());
    off += weights[l].size();
    p.segment(off, biases[l].size()) = biases[l];
    off += biases[l].size();
  }
  return p;
}

void Mlp::set_parameters(const VectorXd& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) throw std::invalid_argument("Mlp: parameter size");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Eigen::Map<VectorXd>(weights[l].data(), weights[l].size()) = p.segment(off, weights[l].size());
    off += weights[l].size();
    biases[l] = p.segment(off, biases[l].size());
    off += biases[l].size();
  }
}

bool Mlp::finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return output_mean.allFinite() && output_scale.allFinite();
}

void Mlp::save_json(std::ostream& os) const {
  json j;
  j["format"] = "cdd-mlp";
  j["version"] = 1;
  j["layers"] = layer_sizes();
  j["dropout"] = spec_.dropout;
  j["l2"] = spec_.l2;
  j["output_mean"] = std::vector<double>(output_mean.data(), output_mean.data() + output_mean.size());
  j["output_scale"] = std::vector<double>(output_scale.data(), output_scale.data() + output_scale.size());
  json ws = json::array(), bs = json::array();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    // row-major, rows = outputs
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(weights[l].size()));
    for (Eigen::Index r = 0; r < weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights[l].cols(); ++c) w.push_back(weights[l](r, c));
    }
    ws.push_back(w);
    bs.push_back(std::vector<double>(biases[l].data(), biases[l].data() + biases[l].size()));
  }
  j["weights"] = ws;
  j["biases"] = bs;
  os << j.dump() << '\n';
}

Mlp Mlp::load_json(std::istream& is, const std::optional<std::vector<int>>& expected) {
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
  if (j.value("format", "") != "cdd-mlp" || j.value("version", 0) != 1) {
    throw std::runtime_error("model file: unknown format or version");
  }
  const auto layers = j.at("layers").get<std::vector<int>>();
  if (layers.size() < 2 || layers.front() != 3 || layers.back() != 6) {
    throw std::runtime_error("model file: network must map 3 inputs to 6 outputs");
  }
  if (expected && *expected != layers) throw std::runtime_error("model file: layer shape mismatch");
  Mlp m;
  m.spec_.hidden.assign(layers.begin() + 1, layers.end() - 1);
  m.spec_.dropout = j.at("dropout").get<double>();
  m.spec_.l2 = j.at("l2").get<double>();
  const auto mean = j.at("output_mean").get<std::vector<double>>();
  const auto scale = j.at("output_scale").get<std::vector<double>>();
  if (mean.size() != 6 || scale.size() != 6) throw std::runtime_error("model file: output scaling must have 6 entries");
  m.output_mean = Eigen::Map<const VectorXd>(mean.data(), 6);
  m.output_scale = Eigen::Map<const VectorXd>(scale.data(), 6);
  const auto& ws = j.at("weights");
  const auto& bs = j.at("biases");
  if (ws.size() != layers.size() - 1 || bs.size() != layers.size() - 1) {
    throw std::runtime_error("model file: layer count does not match header");
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto w = ws[l].get<std::vector<double>>();
    const auto b = bs[l].get<std::vector<double>>();
    const auto rows = static_cast<std::size_t>(layers[l + 1]), cols = static_cast<std::size_t>(layers[l]);
    if (w.size() != rows * cols || b.size() != rows) throw std::runtime_error("model file: layer shape mismatch");
    MatrixXd wm(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) wm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r * cols + c];
    }
    m.weights.push_back(wm);
    m.biases.push_back(Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(rows)));
  }
  if (!m.finite()) throw std::runtime_error("model file: non-finite parameters");
  return m;
}

// ---------------------------------------------------------------- training

double mse(const Mlp& model, const std::vector<DatasetRecord>& data) {
  if (data.empty()) return 0.0;
  const MatrixXd out =
      (model.forward(inputs(data)).array().colwise() * model.output_scale.array()).colwise() +
      model.output_mean.array();
  return (out - targets(data)).squaredNorm() / static_cast<double>(6 * data.size());
}

TrainHistory train(Mlp& model, const std::vector<DatasetRecord>& data, const TrainOptions& opt,
                   const std::vector<DatasetRecord>* validation) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (opt.batch < 1 || opt.epochs < 0 || !(opt.lr > 0)) throw std::invalid_argument("train: bad options");

  const MatrixXd x = inputs(data);
  const MatrixXd y_raw = targets(data);
  if (opt.normalize_targets) {
    model.output_mean = y_raw.rowwise().mean();
    const MatrixXd centred = y_raw.colwise() - model.output_mean;
    model.output_scale = (centred.rowwise().squaredNorm() / static_cast<double>(data.size())).cwiseSqrt();
    for (Eigen::Index k = 0; k < 6; ++k) {
      if (!(model.output_scale(k) > 1e-12)) model.output_scale(k) = 1.0;
    }
  } else {
    model.output_mean.setZero();
    model.output_scale.setOnes();
  }
  const MatrixXd y = normalise(y_raw, model);
  MatrixXd xv, yv;
  if (validation && !validation->empty()) {
    xv = inputs(*validation);
    yv = normalise(targets(*validation), model);
  }
  auto data_mse = [&](const MatrixXd& a, const MatrixXd& b) { return (model.forward(a) - b).squaredNorm() / b.size(); };

  std::mt19937_64 rng(opt.seed);
  std::bernoulli_distribution keep(1.0 - model.spec().dropout);
  const double inv_keep = 1.0 / (1.0 - model.spec().dropout);
  const std::vector<int> sizes = model.layer_sizes();

  const auto n_par = static_cast<Eigen::Index>(model.parameter_count());
  VectorXd m1 = VectorXd::Zero(n_par), m2 = VectorXd::Zero(n_par), grad;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainHistory hist;
  VectorXd checkpoint = model.parameters();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch));
      const auto bsz = static_cast<Eigen::Index>(end - start);
      MatrixXd xb(3, bsz), yb(6, bsz);
      for (Eigen::Index c = 0; c < bsz; ++c) {
        xb.col(c) = x.col(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(c)]));
        yb.col(c) = y.col(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(c)]));
      }
      std::vector<MatrixXd> masks;
      if (model.spec().dropout > 0) {
        for (std::size_t l = 1; l + 1 < sizes.size(); ++l) {
          MatrixXd mk(sizes[l], bsz);
          for (Eigen::Index i = 0; i < mk.size(); ++i) mk.data()[i] = keep(rng) ? inv_keep : 0.0;
          masks.push_back(mk);
        }
      }
      model.loss_and_gradient(xb, yb, &grad, masks.empty() ? nullptr : &masks);
      ++step;
      m1 = b1 * m1 + (1 - b1) * grad;
      m2 = b2 * m2 + (1 - b2) * grad.cwiseAbs2();
      const double c1 = 1 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1 - std::pow(b2, static_cast<double>(step));
      const VectorXd update = (opt.lr / c1) * m1.array() / ((m2.array() / c2).sqrt() + eps);
      model.set_parameters(model.parameters() - update);
    }
    const double tl = data_mse(x, y);
    if (!std::isfinite(tl) || !model.finite()) {
      model.set_parameters(checkpoint);
      hist.diverged = true;
      break;
    }
    checkpoint = model.parameters();
    hist.train_loss.push_back(tl);
    if (xv.size() > 0) hist.validation_loss.push_back(data_mse(xv, yv));
  }
  return hist;
}

std::optional<int> plateau_epoch(const std::vector<double>& curve, int window, double rel_tol) {
  if (window < 1) throw std::invalid_argument("plateau_epoch: window must be positive");
  const auto n = static_cast<int>(curve.size());
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e + window < n; ++e) {
    best = std::min(best, curve[static_cast<std::size_t>(e)]);
    double later = std::numeric_limits<double>::infinity();
    for (int k = e + 1; k <= e + window; ++k) later = std::min(later, curve[static_cast<std::size_t>(k)]);
    if (later >= best * (1.0 - rel_tol)) return e + 1;
  }
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || n < static_cast<std::size_t>(k)) throw std::invalid_argument("kfold: need 2 <= k <= n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  const auto uk = static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < uk; ++f) {
    const std::size_t len = n / uk + (f < n % uk ? 1 : 0);
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(folds[f].begin(), folds[f].end());
    pos += len;
  }
  return folds;
}

CrossValidation kfold_crossval(const MlpSpec& spec, const std::vector<DatasetRecord>& data, int k,
                               const TrainOptions& opt) {
  CrossValidation cv;
  cv.folds = kfold_partition(data.size(), k, opt.seed);
  for (std::size_t f = 0; f < cv.folds.size(); ++f) {
    std::vector<char> held(data.size(), 0);
    for (std::size_t i : cv.folds[f]) held[i] = 1;
    std::vector<DatasetRecord> tr, va;
    for (std::size_t i = 0; i < data.size(); ++i) (held[i] ? va : tr).push_back(data[i]);
    std::mt19937_64 init(opt.seed + 1000 + f);
    Mlp model(spec, init);
    TrainOptions o = opt;
    o.seed = opt.seed + f;
    cv.histories.push_back(train(model, tr, o, &va));
  }
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto& h : cv.histories) len = std::min(len, h.train_loss.size());
  cv.mean_train.assign(len, 0.0);
  cv.mean_validation.assign(len, 0.0);
  for (const auto& h : cv.histories) {
    for (std::size_t e = 0; e < len; ++e) {
      cv.mean_train[e] += h.train_loss[e] / static_cast<double>(k);
      cv.mean_validation[e] += h.validation_loss[e] / static_cast<double>(k);
    }
  }
  return cv;
}

// ---------------------------------------------------------------- pipeline

std::vector<Vec3> generate_targets(int n, std::mt19937_64& rng) {
  if (n <= 0) throw std::invalid_argument("generate_targets: n must be positive");
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ang(0.0, M_PI);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  while (out.size() < static_cast<std::size_t>(n)) {
    const double x = nd(rng), y = nd(rng), z = nd(rng);
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r < 1e-12) continue;
    const double theta = ang(rng);
    out.push_back({theta * x / r, theta * y / r, theta * z / r});
  }
  return out;
}

GammaVector predict_costate(const Mlp& model, const Vec3& u) { return model.predict(u); }

std::vector<DatasetRecord> solve_targets(const std::vector<Vec3>& targets, const SolveSettings& s) {
  const NoiseTable noise(s.noise, s.grid_n);
  std::vector<DatasetRecord> out(targets.size());
  parallel_for(targets.size(), s.jobs, [&](std::size_t i) {
    QJumpOptions o;
    o.tol = s.tol;
    const QJumpResult r = q_jump(target_from_axis(targets[i]), noise, s.schedule, o);
    out[i] = {targets[i], r.solution.costate0, r.solution.achieved_infidelity, kSubRiemannian, s.grid_n};
  });
  return out;
}

AugmentReport augment(Mlp& model, Dataset& dataset, const AugmentOptions& opt, const SolveSettings& s,
                      std::mt19937_64& rng, std::ostream* sink) {
  const NoiseTable noise(s.noise, s.grid_n);
  AugmentReport rep;
  for (int round = 0; round < opt.max_rounds; ++round) {
    if (opt.target_size > 0 && dataset.size() >= opt.target_size) break;
    ++rep.rounds;
    const std::vector<Vec3> targets = generate_targets(opt.batch, rng);
    std::vector<std::optional<DatasetRecord>> refined(targets.size());
    std::vector<double> raw(targets.size(), 1.0);
    parallel_for(targets.size(), s.jobs, [&](std::size_t i) {
      try {
        const Mat2 t = target_from_axis(targets[i]);
        const GammaVector pred = model.predict(targets[i]);
        raw[i] = endpoint_infidelity(pred, kSubRiemannian, noise, t);
        const RefineResult r =
            refine_costate(pred, t, kSubRiemannian, noise, opt.threshold, opt.minimize, ShootOptions{}, opt.shoot);
        refined[i] = DatasetRecord{targets[i], r.costate, r.infidelity, kSubRiemannian, s.grid_n};
      } catch (const std::exception&) {
        // left empty and counted as failed below
      }
    });
    for (std::size_t i = 0; i < targets.size(); ++i) {
      rep.raw_infidelity.push_back(raw[i]);
      if (!refined[i]) {
        ++rep.failed;
      } else if (refined[i]->infidelity < opt.threshold) {
        ++rep.admitted;
        dataset.train.push_back(dataset.records.size());
        dataset.records.push_back(*refined[i]);
        if (sink) write_record_jsonl(*sink, *refined[i]);
      } else {
        ++rep.rejected;
      }
    }
    TrainOptions to = opt.train;
    to.seed = opt.train.seed + static_cast<std::uint64_t>(round) + 1;
    std::mt19937_64 init(to.seed);
    Mlp fresh(model.spec(), init);
    train(fresh, filter_admissible(dataset.subset(dataset.train), opt.threshold), to);
    model = fresh;
  }
  return rep;
}

Histogram evaluate_histogram(const Mlp& model, const std::vector<DatasetRecord>& data, const SolveSettings& s) {
  const NoiseTable noise(s.noise, s.grid_n);
  Histogram h;
  h.infidelities.resize(data.size());
  parallel_for(data.size(), s.jobs, [&](std::size_t i) {
    h.infidelities[i] =
        endpoint_infidelity(model.predict(data[i].u), kSubRiemannian, noise, target_from_axis(data[i].u));
  });
  if (data.empty()) return h;
  for (double v : h.infidelities) {
    const std::size_t bin = v < 1e-4 ? 0 : (v < 1e-1 ? 1 : 2);
    h.fraction[bin] += 1.0 / static_cast<double>(data.size());
  }
  return h;
}

}  // namespace cdd
