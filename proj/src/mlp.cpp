#include "errsense/error.hpp"
#include "errsense/learn.hpp"
#include "errsense/rng.hpp"

#include <cmath>
#include <numeric>

namespace errsense {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Matrix activate(const Matrix& z, Activation a) {
  if (a == Activation::relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative of the activation, expressed through the pre-activation z.
Matrix activate_grad(const Matrix& z, Activation a) {
  if (a == Activation::relu) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

struct Forward {
  std::vector<Matrix> inputs; // input to each layer
  std::vector<Matrix> pre;    // pre-activation of each layer
};

Forward forward(const MlpModel& m, const Matrix& X) {
  Forward f;
  Matrix a = X;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Matrix z = a * m.layers[l].W.transpose();
    z.rowwise() += m.layers[l].b.transpose();
    f.inputs.push_back(std::move(a));
    if (l + 1 < m.layers.size()) a = activate(z, m.activation);
    f.pre.push_back(std::move(z));
  }
  return f;
}

double penalty(const MlpModel& m, double l2) {
  double s = 0.0;
  for (const auto& layer : m.layers) s += layer.W.squaredNorm();
  return 0.5 * l2 * s;
}

double data_loss(const Matrix& z, const Labels& y, std::span<const std::size_t> rows) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double zi = z(i, 0);
    loss += y[rows[static_cast<std::size_t>(i)]] == 1 ? softplus(-zi) : softplus(zi);
  }
  return loss / static_cast<double>(z.rows());
}

MlpGradient gradient_rows(const MlpModel& m, const Matrix& X, const Labels& y, std::span<const std::size_t> rows,
                          double l2) {
  const Forward f = forward(m, X);
  const Matrix& z = f.pre.back();
  MlpGradient g;
  g.loss = data_loss(z, y, rows) + penalty(m, l2);
  const auto B = static_cast<double>(X.rows());
  Matrix dz(z.rows(), 1);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-z(i, 0)));
    dz(i, 0) = (p - static_cast<double>(y[rows[static_cast<std::size_t>(i)]])) / B;
  }
  g.grad.resize(m.layers.size());
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    g.grad[l].W = dz.transpose() * f.inputs[l] + l2 * m.layers[l].W;
    g.grad[l].b = dz.colwise().sum().transpose();
    if (l > 0) {
      Matrix da = dz * m.layers[l].W;
      dz = da.cwiseProduct(activate_grad(f.pre[l - 1], m.activation));
    }
  }
  return g;
}

} // namespace

MlpModel mlp_init(std::size_t n_inputs, const MlpParams& hp, double prior, std::uint64_t seed) {
  for (std::size_t h : hp.hidden) {
    if (h == 0) throw ParameterError("hidden layer sizes must be positive");
  }
  Rng rng(seed);
  MlpModel m;
  m.activation = hp.activation;
  m.mean = Vector::Zero(static_cast<Eigen::Index>(n_inputs));
  m.scale = Vector::Ones(static_cast<Eigen::Index>(n_inputs));
  std::size_t in = n_inputs;
  std::vector<std::size_t> sizes = hp.hidden;
  sizes.push_back(1);
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const std::size_t out = sizes[l];
    const bool hidden = l + 1 < sizes.size();
    const double limit = hidden && hp.activation == Activation::relu ? std::sqrt(6.0 / double(in))
                                                                      : std::sqrt(6.0 / double(in + out));
    MlpLayer layer;
    layer.W.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.W.cols(); ++c) layer.W(r, c) = rng.uniform(-limit, limit);
    }
    layer.b = Vector::Zero(static_cast<Eigen::Index>(out));
    m.layers.push_back(std::move(layer));
    in = out;
  }
  const double p = std::clamp(prior, 1e-6, 1.0 - 1e-6);
  m.layers.back().b(0) = std::log(p / (1.0 - p));
  return m;
}

MlpGradient mlp_loss_and_gradient(const MlpModel& m, const Matrix& Xs, const Labels& y, double l2) {
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return gradient_rows(m, Xs, y, rows, l2);
}

double mlp_loss(const MlpModel& m, const Matrix& Xs, const Labels& y, double l2) {
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  return data_loss(forward(m, Xs).pre.back(), y, rows) + penalty(m, l2);
}

std::vector<double> mlp_probability(const MlpModel& m, const Matrix& X) {
  Matrix Xs = X.rowwise() - m.mean.transpose();
  Xs = Xs.array().rowwise() / m.scale.transpose().array();
  const Matrix z = forward(m, Xs).pre.back();
  std::vector<double> p(static_cast<std::size_t>(z.rows()));
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-z(static_cast<Eigen::Index>(i), 0)));
  return p;
}

TrainedModel train_mlp(const Matrix& X, const Labels& y, std::span<const std::string> names, const MlpParams& hp,
                       std::uint64_t seed) {
  check_binary_labels(X, y, 10);
  if (names.size() != static_cast<std::size_t>(X.cols())) throw SchemaError("one name per feature column required");
  if (hp.batch == 0) throw ParameterError("batch size must be positive");
  if (!(hp.lr > 0.0) || !(hp.l2 >= 0.0)) throw ParameterError("learning rate must be positive and l2 non-negative");
  const std::size_t n = y.size();

  std::size_t pos = 0;
  for (int v : y) pos += static_cast<std::size_t>(v);
  const double prior = static_cast<double>(pos) / static_cast<double>(n);

  MlpModel m = mlp_init(names.size(), hp, prior, derive_seed(seed, "init"));
  m.mean = X.colwise().mean().transpose();
  Matrix Xs = X.rowwise() - m.mean.transpose();
  m.scale = (Xs.array().square().colwise().sum() / static_cast<double>(n)).sqrt().transpose();
  for (Eigen::Index c = 0; c < m.scale.size(); ++c) {
    if (!(m.scale(c) > 1e-12)) m.scale(c) = 1.0;
  }
  Xs = Xs.array().rowwise() / m.scale.transpose().array();

  Rng rng(derive_seed(seed, "batches"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Matrix batch;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < n; s += hp.batch) {
      const std::size_t e = std::min(n, s + hp.batch);
      const std::span<const std::size_t> rows(order.data() + s, e - s);
      batch.resize(static_cast<Eigen::Index>(rows.size()), Xs.cols());
      for (std::size_t k = 0; k < rows.size(); ++k) {
        batch.row(static_cast<Eigen::Index>(k)) = Xs.row(static_cast<Eigen::Index>(rows[k]));
      }
      const MlpGradient g = gradient_rows(m, batch, y, rows, hp.l2);
      epoch_loss += g.loss * static_cast<double>(rows.size());
      for (std::size_t l = 0; l < m.layers.size(); ++l) {
        m.layers[l].W -= hp.lr * g.grad[l].W;
        m.layers[l].b -= hp.lr * g.grad[l].b;
      }
    }
    if (!std::isfinite(epoch_loss)) {
      throw DivergenceError("MLP loss became non-finite at epoch " + std::to_string(epoch));
    }
  }
  m.final_loss = mlp_loss(m, Xs, y, hp.l2);
  if (!std::isfinite(m.final_loss)) {
    throw DivergenceError("MLP loss became non-finite at epoch " + std::to_string(hp.epochs));
  }

  TrainedModel tm;
  tm.kind = ClassifierKind::mlp;
  tm.feature_names.assign(names.begin(), names.end());
  tm.seed = seed;
  tm.hyperparameters = {{"hidden", hp.hidden},
                        {"activation", hp.activation == Activation::relu ? "relu" : "tanh"},
                        {"epochs", hp.epochs},
                        {"batch", hp.batch},
                        {"lr", hp.lr},
                        {"l2", hp.l2}};
  tm.class_prior = prior;
  tm.params = std::move(m);
  return tm;
}

} // namespace errsense
