#include "errsense/error.hpp"
#include "errsense/eval.hpp"
#include "errsense/learn.hpp"
#include "errsense/oracles.hpp"
#include "errsense/rng.hpp"
#include "errsense/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace errsense;

namespace {

struct Data {
  Matrix X;
  Labels y;
  std::vector<std::string> names;
};

Data blobs(std::size_t n, double separation, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, 2), Labels(n), {"a", "b"}};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2;
    d.y[i] = label;
    d.X(i, 0) = rng.normal() + (label ? separation : 0.0);
    d.X(i, 1) = rng.normal();
  }
  return d;
}

Data noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Data d{Matrix(n, 5), Labels(n), {"a", "b", "c", "d", "e"}};
  for (std::size_t i = 0; i < n; ++i) {
    d.y[i] = i % 2;
    for (int j = 0; j < 5; ++j) d.X(i, j) = rng.normal();
  }
  return d;
}

double accuracy(const Labels& y, const Labels& p) {
  double ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += y[i] == p[i];
  return ok / static_cast<double>(y.size());
}

double cv_accuracy(const Data& d, ClassifierKind kind) {
  LearnConfig cfg;
  cfg.mlp.epochs = 50;
  std::vector<double> accs;
  for (std::size_t f = 0; f < 5; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < d.y.size(); ++i) (i % 5 == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    Matrix Xtr = d.X(tr, Eigen::all), Xte = d.X(te, Eigen::all);
    Labels ytr, yte;
    for (auto i : tr) ytr.push_back(d.y[i]);
    for (auto i : te) yte.push_back(d.y[i]);
    const auto m = train_model(kind, Xtr, ytr, d.names, cfg, 3 + f);
    accs.push_back(accuracy(yte, predict(m, Xte, d.names).labels));
  }
  return std::accumulate(accs.begin(), accs.end(), 0.0) / 5.0;
}

} // namespace

TEST_CASE("random forest separates blobs and stays near chance on noise") {
  const auto d = blobs(200, 5.0, 1);
  const auto m = train_random_forest(d.X, d.y, d.names, ForestParams{}, 7);
  CHECK(accuracy(d.y, predict(m, d.X, d.names).labels) >= 0.99);
  CHECK(std::get<ForestModel>(m.params).oob_accuracy > 0.9);
  CHECK(std::abs(cv_accuracy(noise(200, 2), ClassifierKind::random_forest) - 0.5) <= 0.15);
}

TEST_CASE("training rejects single-class labels") {
  auto d = blobs(20, 1.0, 3);
  std::fill(d.y.begin(), d.y.end(), 1);
  CHECK_THROWS_AS(train_random_forest(d.X, d.y, d.names, ForestParams{}, 1), DegenerateLabelError);
  CHECK_THROWS_AS(train_adaboost(d.X, d.y, d.names, AdaBoostParams{}, 1), DegenerateLabelError);
  CHECK_THROWS_AS(train_mlp(d.X, d.y, d.names, MlpParams{}, 1), DegenerateLabelError);
}

TEST_CASE("models serialize identically for identical inputs") {
  const auto d = blobs(100, 1.0, 4);
  ForestParams fp;
  fp.n_trees = 10;
  CHECK(train_random_forest(d.X, d.y, d.names, fp, 9).to_json().dump() ==
        train_random_forest(d.X, d.y, d.names, fp, 9).to_json().dump());
  MlpParams mp;
  mp.epochs = 5;
  CHECK(train_mlp(d.X, d.y, d.names, mp, 9).to_json().dump() == train_mlp(d.X, d.y, d.names, mp, 9).to_json().dump());
  const auto m = train_adaboost(d.X, d.y, d.names, AdaBoostParams{}, 9);
  const auto back = TrainedModel::from_json(m.to_json());
  CHECK(predict(back, d.X, d.names).probability == predict(m, d.X, d.names).probability);
}

TEST_CASE("AdaBoost stops on a perfect stump") {
  Data d{Matrix(20, 1), Labels(20), {"x"}};
  for (int i = 0; i < 20; ++i) {
    d.y[i] = i % 2;
    d.X(i, 0) = d.y[i];
  }
  const auto m = train_adaboost(d.X, d.y, d.names, AdaBoostParams{}, 1);
  const auto& ab = std::get<AdaBoostModel>(m.params);
  CHECK(ab.learners.size() == 1);
  CHECK(accuracy(d.y, predict(m, d.X, d.names).labels) == 1.0);
}

TEST_CASE("AdaBoost stumps cannot learn XOR") {
  Data d{Matrix(40, 2), Labels(40), {"a", "b"}};
  for (int i = 0; i < 40; ++i) {
    const int a = i % 2, b = (i / 2) % 2;
    d.X(i, 0) = a;
    d.X(i, 1) = b;
    d.y[i] = a ^ b;
  }
  const auto m = train_adaboost(d.X, d.y, d.names, AdaBoostParams{}, 1);
  CHECK(accuracy(d.y, predict(m, d.X, d.names).labels) <= 0.75);
}

TEST_CASE("AdaBoost weights stay normalised") {
  const auto d = blobs(100, 1.0, 5);
  AdaBoostParams hp;
  hp.n_rounds = 20;
  const auto m = train_adaboost(d.X, d.y, d.names, hp, 1);
  for (double s : std::get<AdaBoostModel>(m.params).weight_sums) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("MLP learns blobs") {
  const auto d = blobs(200, 5.0, 6);
  MlpParams hp;
  hp.lr = 0.05;
  hp.epochs = 100;
  const auto m = train_mlp(d.X, d.y, d.names, hp, 2);
  CHECK(accuracy(d.y, predict(m, d.X, d.names).labels) >= 0.99);
  CHECK(std::isfinite(std::get<MlpModel>(m.params).final_loss));
}

TEST_CASE("zero-epoch MLP is an untrained baseline") {
  const auto d = blobs(200, 0.0, 7);
  MlpParams hp;
  hp.epochs = 0;
  const auto m = train_mlp(d.X, d.y, d.names, hp, 2);
  CHECK(std::abs(accuracy(d.y, predict(m, d.X, d.names).labels) - 0.5) <= 0.2);
}

TEST_CASE("MLP gradient matches central differences") {
  Rng rng(8);
  Matrix X(5, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  const Labels y{1, 0, 0, 1, 1};
  for (Activation a : {Activation::relu, Activation::tanh}) {
    for (std::vector<std::size_t> hidden : {std::vector<std::size_t>{6}, std::vector<std::size_t>{5, 3}}) {
      MlpParams hp;
      hp.activation = a;
      hp.hidden = hidden;
      const auto m = mlp_init(4, hp, 0.5, rng.next());
      CHECK(oracle::mlp_gradient_error(m, X, y, 1e-3) < 1e-4);
    }
  }
}

TEST_CASE("MLP divergence reports the epoch") {
  const auto d = blobs(64, 1.0, 9);
  MlpParams hp;
  hp.lr = 1e300;
  CHECK_THROWS_AS(train_mlp(d.X, d.y, d.names, hp, 1), DivergenceError);
}

TEST_CASE("prediction tie rule and schema checks") {
  const auto d = blobs(50, 1.0, 10);
  MlpParams hp;
  hp.epochs = 0;
  auto m = train_mlp(d.X, d.y, d.names, hp, 1);
  auto& mlp = std::get<MlpModel>(m.params);
  for (auto& l : mlp.layers) {
    l.W.setZero();
    l.b.setZero();
  }
  const auto p = predict(m, d.X, d.names);
  CHECK(p.probability[0] == 0.5);
  CHECK(p.labels[0] == 1);

  TrainedModel f;
  f.feature_names = {"x"};
  Tree stump;
  stump.nodes = {{0, 4.5, 1, 2, 0.5}, {-1, 0, -1, -1, 1.0}, {-1, 0, -1, -1, 0.0}};
  f.params = ForestModel{{stump, stump, stump}, 0.0};
  Matrix xs(10, 1);
  for (int i = 0; i < 10; ++i) xs(i, 0) = i;
  const std::vector<std::string> x_name{"x"};
  for (double q : predict(f, xs, x_name).probability) CHECK((q == 0.0 || q == 1.0));

  const std::vector<std::string> wrong{"a", "z"};
  CHECK_THROWS_AS(predict(m, d.X, wrong), SchemaError);
}

TEST_CASE("prediction aligns columns by name") {
  const auto d = blobs(100, 2.0, 11);
  const auto m = train_random_forest(d.X, d.y, d.names, ForestParams{}, 3);
  Matrix swapped(d.X.rows(), 2);
  swapped.col(0) = d.X.col(1);
  swapped.col(1) = d.X.col(0);
  const std::vector<std::string> names{"b", "a"};
  CHECK(predict(m, swapped, names).probability == predict(m, d.X, d.names).probability);
}

TEST_CASE("AdaBoost ignores training row order") {
  const auto d = blobs(60, 1.0, 12);
  std::vector<Eigen::Index> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Matrix Xp = d.X(perm, Eigen::all);
  Labels yp;
  for (auto i : perm) yp.push_back(d.y[i]);
  AdaBoostParams hp;
  hp.n_rounds = 10;
  const auto a = train_adaboost(d.X, d.y, d.names, hp, 1);
  const auto b = train_adaboost(Xp, yp, d.names, hp, 1);
  const auto pa = predict(a, d.X, d.names).probability, pb = predict(b, d.X, d.names).probability;
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-9));
}
