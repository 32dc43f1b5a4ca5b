#include <doctest.h>

#include <set>
#include <sstream>

#include "cdd/surrogate.hpp"
#include "random.hpp"

using namespace cdd;
using namespace cdd::testing;

namespace {

// Central-difference gradient of the full loss, parameter by parameter.
Eigen::VectorXd numeric_gradient(Mlp& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                 const std::vector<Eigen::MatrixXd>* masks) {
  const Eigen::VectorXd p0 = m.parameters();
  Eigen::VectorXd g(p0.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    Eigen::VectorXd p = p0;
    p[i] += h;
    m.set_parameters(p);
    const double up = m.loss_and_gradient(x, y, nullptr, masks);
    p[i] -= 2 * h;
    m.set_parameters(p);
    const double down = m.loss_and_gradient(x, y, nullptr, masks);
    g[i] = (up - down) / (2 * h);
  }
  m.set_parameters(p0);
  return g;
}

std::vector<DatasetRecord> synthetic_records(int n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> nd;
  std::vector<DatasetRecord> out;
  for (int i = 0; i < n; ++i) {
    DatasetRecord r;
    r.u = {nd(g), nd(g), nd(g)};
    for (int k = 0; k < 6; ++k) r.lambda[k] = std::sin(r.u[k % 3] * (k + 1)) + 0.5 * r.u[(k + 1) % 3];
    r.lambda[5] = 20.0 * r.lambda[5] - 10.0;
    r.infidelity = 1e-5;
    r.grid_n = 200;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("backprop matches finite differences") {
  std::mt19937_64 init(3);
  for (const auto& hidden : {std::vector<int>{8, 8}, std::vector<int>{64, 64, 64, 64, 64}}) {
    MlpSpec spec;
    spec.hidden = hidden;
    Mlp m(spec, init);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 7);
    Eigen::MatrixXd y = Eigen::MatrixXd::Random(6, 7);

    Eigen::VectorXd grad;
    m.loss_and_gradient(x, y, &grad);
    const Eigen::VectorXd fd = numeric_gradient(m, x, y, nullptr);
    CHECK((grad - fd).norm() / fd.norm() < 1e-5);

    // fixed dropout masks
    std::vector<Eigen::MatrixXd> masks;
    std::bernoulli_distribution keep(0.7);
    for (int h : hidden) {
      Eigen::MatrixXd mk(h, 7);
      for (Eigen::Index i = 0; i < mk.size(); ++i) mk.data()[i] = keep(init) ? 1.0 / 0.7 : 0.0;
      masks.push_back(mk);
    }
    m.loss_and_gradient(x, y, &grad, &masks);
    const Eigen::VectorXd fdm = numeric_gradient(m, x, y, &masks);
    CHECK((grad - fdm).norm() / fdm.norm() < 1e-5);
  }
}

TEST_CASE("parameter flattening round trip") {
  std::mt19937_64 init(5);
  Mlp m(MlpSpec{}, init);
  CHECK(m.layer_sizes() == std::vector<int>{3, 64, 64, 64, 64, 64, 6});
  const Eigen::VectorXd p = m.parameters();
  CHECK(static_cast<std::size_t>(p.size()) == m.parameter_count());
  CHECK(m.parameter_count() == 3 * 64 + 64 + 4 * (64 * 64 + 64) + 64 * 6 + 6);
  Mlp other(MlpSpec{}, init);
  other.set_parameters(p);
  CHECK((other.parameters() - p).norm() == 0.0);
  CHECK(m.finite());
}

TEST_CASE("k-fold partition is a disjoint cover") {
  for (std::size_t n : {4u, 10u, 97u, 1000u}) {
    const auto folds = kfold_partition(n, 4, 11);
    REQUIRE(folds.size() == 4);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      total += f.size();
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      seen.insert(f.begin(), f.end());
    }
    CHECK(total == n);
    CHECK(seen.size() == n);
    CHECK(*seen.rbegin() == n - 1);
    CHECK(hi - lo <= 1);
  }
  CHECK(kfold_partition(50, 4, 1) == kfold_partition(50, 4, 1));
  CHECK(kfold_partition(50, 4, 1) != kfold_partition(50, 4, 2));
  CHECK_THROWS_AS(kfold_partition(3, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(kfold_partition(10, 1, 1), std::invalid_argument);
}

TEST_CASE("dataset split and admission filter") {
  Dataset ds;
  ds.records = synthetic_records(30, 1);
  ds.records[4].infidelity = 0.2;
  CHECK(filter_admissible(ds.records, 5e-3).size() == 29);
  ds.split(1.0 / 3.0, 9);
  CHECK(ds.test.size() == 10);
  CHECK(ds.train.size() == 20);
  std::set<std::size_t> all(ds.test.begin(), ds.test.end());
  all.insert(ds.train.begin(), ds.train.end());
  CHECK(all.size() == 30);
}

TEST_CASE("plateau detection") {
  std::vector<double> falling;
  for (int e = 0; e < 300; ++e) falling.push_back(std::exp(-0.05 * e) + 0.1);
  const auto pe = plateau_epoch(falling, 30, 0.01);
  REQUIRE(pe.has_value());
  CHECK(*pe > 20);
  CHECK(*pe < 150);
  std::vector<double> steady;
  for (int e = 0; e < 100; ++e) steady.push_back(1.0 / (e + 1));
  CHECK_FALSE(plateau_epoch(steady, 30, 0.01).has_value());
}

TEST_CASE("training reduces the loss and generalises on a smooth map") {
  const auto data = synthetic_records(600, 2);
  const std::vector<DatasetRecord> tr(data.begin(), data.begin() + 450), va(data.begin() + 450, data.end());
  std::mt19937_64 init(1);
  MlpSpec spec;
  spec.hidden = {32, 32};
  spec.dropout = 0.1;
  spec.l2 = 1e-4;
  Mlp m(spec, init);
  TrainOptions o;
  o.epochs = 60;
  o.lr = 3e-3;
  const TrainHistory h = train(m, tr, o, &va);
  REQUIRE(h.train_loss.size() == 60);
  CHECK_FALSE(h.diverged);
  CHECK(h.train_loss.back() < 0.5 * h.train_loss.front());
  CHECK(h.validation_loss.back() < 0.5 * h.validation_loss.front());
  // output scaling puts predictions back in original units
  double var = 0.0, mean = 0.0;
  for (const auto& r : va) mean += r.lambda[5] / va.size();
  for (const auto& r : va) var += (r.lambda[5] - mean) * (r.lambda[5] - mean) / va.size();
  CHECK(mse(m, va) < var);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const auto data = synthetic_records(100, 3);
  MlpSpec spec;
  spec.hidden = {16};
  TrainOptions o;
  o.epochs = 5;
  std::mt19937_64 a(4), b(4);
  Mlp ma(spec, a), mb(spec, b);
  train(ma, data, o);
  train(mb, data, o);
  CHECK((ma.parameters() - mb.parameters()).norm() == 0.0);
}

TEST_CASE("model file round trip and shape check") {
  std::mt19937_64 init(6);
  MlpSpec spec;
  spec.hidden = {5, 4};
  Mlp m(spec, init);
  m.output_mean[2] = 1.5;
  m.output_scale[5] = 30.0;
  std::stringstream ss;
  m.save_json(ss);
  const Mlp back = Mlp::load_json(ss);
  CHECK((back.parameters() - m.parameters()).norm() < 1e-15);
  const GammaVector a = m.predict({0.1, 0.2, 0.3}), b = back.predict({0.1, 0.2, 0.3});
  CHECK((a - b).norm() < 1e-12);

  std::stringstream again;
  m.save_json(again);
  CHECK_THROWS_AS(Mlp::load_json(again, std::vector<int>{3, 64, 6}), std::runtime_error);
  std::stringstream junk("{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(Mlp::load_json(junk), std::runtime_error);
}

TEST_CASE("dataset lines round trip and corrupt lines are skipped") {
  auto recs = synthetic_records(3, 7);
  std::stringstream ss;
  for (const auto& r : recs) write_record_jsonl(ss, r);
  ss << "{not json\n";
  ss << "{\"u\": [1, 2]}\n";
  std::vector<DatasetRecord> back;
  CHECK(read_dataset_jsonl(ss, back) == 2);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((back[i].lambda - recs[i].lambda).norm() < 1e-12);
    CHECK(back[i].u == recs[i].u);
    CHECK(std::isinf(back[i].q));
    CHECK(back[i].grid_n == 200);
  }
}

TEST_CASE("random targets lie in the closed ball of radius pi") {
  std::mt19937_64 g(8);
  const auto t = generate_targets(2000, g);
  REQUIRE(t.size() == 2000);
  double mean_theta = 0.0;
  for (const Vec3& u : t) {
    const double th = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    CHECK(th <= M_PI);
    mean_theta += th / 2000.0;
  }
  CHECK(mean_theta == doctest::Approx(M_PI / 2).epsilon(0.05));
}
