#include "cvas/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "cvas/error.hpp"
#include "cvas/io_util.hpp"
#include "cvas/random.hpp"

namespace cvas {
namespace {

constexpr double kLossClamp = 1e-12;

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Keeps the forward pass strictly inside (0, 1) after saturation.
double clamp_open_unit(double p) noexcept {
  return std::clamp(p, std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFiniteInput, std::string(what) + " has NaN/Inf");
  }
}

void check_labels(std::span<const Label> labels, Eigen::Index rows) {
  if (static_cast<Eigen::Index>(labels.size()) != rows) {
    throw Error(ErrorCode::kDimensionMismatch, "label count != feature rows");
  }
  bool pos = false, neg = false;
  for (Label y : labels) {
    if (y == 1) pos = true;
    else if (y == -1) neg = true;
    else throw Error(ErrorCode::kInvalidArgument, "labels must be +1 or -1");
  }
  if (!(pos && neg)) {
    throw Error(ErrorCode::kSingleClassData, "training data has one class");
  }
}

struct AdamSlot {
  Matrix m_w, v_w;
  Vector m_b, v_b;
};

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(adam_beta1) || !in_unit(adam_beta2)) {
    throw Error(ErrorCode::kInvalidArgument, "Adam betas must lie in (0,1)");
  }
  if (!(adam_eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "adam_eps must be > 0");
}

MlpModel::MlpModel(std::vector<Matrix> weights, std::vector<Vector> biases,
                   double threshold)
    : weights_(std::move(weights)), biases_(std::move(biases)),
      threshold_(threshold) {
  if (weights_.size() != kHiddenWidths.size() + 1 ||
      biases_.size() != weights_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "MLP must have exactly 4 layers");
  }
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0,1)");
  }
  layer_dims_.push_back(static_cast<int>(weights_.front().cols()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const int expected_out =
        l < kHiddenWidths.size() ? kHiddenWidths[l] : 1;
    if (weights_[l].rows() != expected_out ||
        weights_[l].cols() != layer_dims_.back() ||
        biases_[l].size() != expected_out) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(l) + " has wrong shape");
    }
    layer_dims_.push_back(expected_out);
  }
  if (layer_dims_.front() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "input dimension must be >= 1");
  }
}

MlpModel MlpModel::initialize(int input_dim, std::uint64_t seed,
                              double threshold) {
  if (input_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "input dimension must be >= 1");
  }
  Rng rng(seed);
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  int fan_in = input_dim;
  for (std::size_t l = 0; l <= kHiddenWidths.size(); ++l) {
    const int fan_out = l < kHiddenWidths.size() ? kHiddenWidths[l] : 1;
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    weights.push_back(std::move(w));
    biases.push_back(Vector::Zero(fan_out));
    fan_in = fan_out;
  }
  return MlpModel(std::move(weights), std::move(biases), threshold);
}

MlpModel MlpModel::from_linear_logit(const Vector& w, double b, double scale,
                                     double offset, double threshold) {
  const auto d = w.size();
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  int fan_in = static_cast<int>(d);
  for (std::size_t l = 0; l <= kHiddenWidths.size(); ++l) {
    const int fan_out = l < kHiddenWidths.size() ? kHiddenWidths[l] : 1;
    weights.push_back(Matrix::Zero(fan_out, fan_in));
    biases.push_back(Vector::Zero(fan_out));
    fan_in = fan_out;
  }
  weights[0].row(0) = w.transpose();
  biases[0](0) = offset - b;
  weights[1](0, 0) = 1.0;
  weights[2](0, 0) = 1.0;
  weights[3](0, 0) = scale;
  biases[3](0) = -scale * offset;
  return MlpModel(std::move(weights), std::move(biases), threshold);
}

void MlpModel::check_input(Eigen::Index dim) const {
  if (dim != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected input dimension " + std::to_string(input_dim()) +
                    ", got " + std::to_string(dim));
  }
}

double MlpModel::logit(const Vector& x) const {
  check_input(x.size());
  Vector h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = weights_[l] * h + biases_[l];
    if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
  }
  return h(0);
}

double MlpModel::probability(const Vector& x) const {
  return clamp_open_unit(sigmoid(logit(x)));
}

Label MlpModel::label(const Vector& x) const {
  return probability(x) >= threshold_ ? 1 : -1;
}

Vector MlpModel::probabilities(const Matrix& x) const {
  check_input(x.cols());
  // Row-by-row so batch and single-point queries round identically.
  Vector p(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    p(i) = probability(x.row(i).transpose());
  }
  return p;
}

std::vector<Label> MlpModel::labels(const Matrix& x) const {
  const Vector p = probabilities(x);
  std::vector<Label> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out[static_cast<std::size_t>(i)] = p(i) >= threshold_ ? 1 : -1;
  }
  return out;
}

Prediction predict(const MlpModel& model, const Vector& x) {
  if (x.size() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input dimension mismatch");
  }
  if (!x.allFinite()) throw Error(ErrorCode::kNonFiniteInput, "x has NaN/Inf");
  const auto& weights = model.weights();
  const auto& biases = model.biases();
  std::vector<Vector> pre;
  pre.reserve(weights.size());
  Vector h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    pre.push_back(weights[l] * h + biases[l]);
    h = l + 1 < weights.size() ? Vector(pre.back().cwiseMax(0.0)) : pre.back();
  }
  const double z = h(0);
  const double s = sigmoid(z);
  // dg/dz = s (1 - s), written as s * sigmoid(-z) for accuracy when s ~ 1.
  Vector delta = Vector::Constant(1, s * sigmoid(-z));
  for (std::size_t l = weights.size(); l-- > 0;) {
    delta = weights[l].transpose() * delta;
    if (l > 0) {
      const Vector& z_prev = pre[l - 1];
      for (Eigen::Index i = 0; i < delta.size(); ++i) {
        if (z_prev(i) <= 0.0) delta(i) = 0.0;
      }
    }
  }
  const double p = clamp_open_unit(s);
  return Prediction{p, p >= model.threshold() ? 1 : -1, std::move(delta)};
}

double bce_loss(const MlpModel& model, const Matrix& features,
                std::span<const Label> labels) {
  const Vector p = model.probabilities(features);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p(i), kLossClamp, 1.0 - kLossClamp);
    total += labels[static_cast<std::size_t>(i)] == 1 ? -std::log(q)
                                                       : -std::log(1.0 - q);
  }
  return total / static_cast<double>(p.size());
}

double accuracy(const MlpModel& model, const Matrix& features,
                std::span<const Label> labels) {
  const auto pred = model.labels(features);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

MlpModel train_mlp(const Matrix& features, std::span<const Label> labels,
                   const TrainConfig& config) {
  config.validate();
  if (features.rows() < 2) {
    throw Error(ErrorCode::kTooFewSamples, "need at least 2 training rows");
  }
  require_finite(features, "features");
  check_labels(labels, features.rows());

  const MlpModel init = MlpModel::initialize(
      static_cast<int>(features.cols()), config.seed);
  std::vector<Matrix> w = init.weights();
  std::vector<Vector> b = init.biases();
  const std::size_t layers = w.size();
  const auto n = features.rows();

  Vector target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    target(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
  }

  std::vector<AdamSlot> adam(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    adam[l].m_w = Matrix::Zero(w[l].rows(), w[l].cols());
    adam[l].v_w = adam[l].m_w;
    adam[l].m_b = Vector::Zero(b[l].size());
    adam[l].v_b = adam[l].m_b;
  }

  std::vector<Matrix> act(layers + 1);  // act[0] = input, act[l+1] = output of layer l
  act[0] = features;
  double beta1_pow = 1.0, beta2_pow = 1.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t l = 0; l < layers; ++l) {
      act[l + 1] = (act[l] * w[l].transpose()).rowwise() + b[l].transpose();
      if (l + 1 < layers) act[l + 1] = act[l + 1].cwiseMax(0.0);
    }
    // d(mean BCE)/d(logit) = (sigmoid(z) - y) / n
    Matrix delta(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      delta(i, 0) = (sigmoid(act[layers](i, 0)) - target(i)) * inv_n;
    }
    beta1_pow *= config.adam_beta1;
    beta2_pow *= config.adam_beta2;
    const double lr_t =
        config.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
    for (std::size_t l = layers; l-- > 0;) {
      const Matrix grad_w = delta.transpose() * act[l];
      const Vector grad_b = delta.colwise().sum().transpose();
      if (l > 0) {
        Matrix next = delta * w[l];
        next = next.cwiseProduct(
            (act[l].array() > 0.0).cast<double>().matrix());
        delta = std::move(next);
      }
      auto& s = adam[l];
      s.m_w = config.adam_beta1 * s.m_w + (1.0 - config.adam_beta1) * grad_w;
      s.v_w = config.adam_beta2 * s.v_w +
              (1.0 - config.adam_beta2) * grad_w.cwiseAbs2();
      s.m_b = config.adam_beta1 * s.m_b + (1.0 - config.adam_beta1) * grad_b;
      s.v_b = config.adam_beta2 * s.v_b +
              (1.0 - config.adam_beta2) * grad_b.cwiseAbs2();
      w[l].array() -= lr_t * s.m_w.array() /
                      (s.v_w.array().sqrt() + config.adam_eps);
      b[l].array() -= lr_t * s.m_b.array() /
                      (s.v_b.array().sqrt() + config.adam_eps);
    }
  }
  return MlpModel(std::move(w), std::move(b), init.threshold());
}

double synthetic_boundary(double x1) noexcept {
  const double x2 = x1 * x1;
  return 1.0 + x1 + 2.0 * x2 + x2 * x1 - x2 * x2;
}

LabeledData generate_synthetic(std::size_t n, double noise_std,
                               std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw Error(ErrorCode::kInvalidArgument, "noise_std must be finite and >= 0");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> u1(-2.0, 4.0);
  std::uniform_real_distribution<double> u2(-2.0, 7.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledData data{Matrix(static_cast<Eigen::Index>(n), 2), {}};
  data.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = u1(rng);
    const double x2 = u2(rng);
    const double eps = noise_std * normal(rng);
    data.features(static_cast<Eigen::Index>(i), 0) = x1;
    data.features(static_cast<Eigen::Index>(i), 1) = x2;
    data.labels.push_back(x2 >= synthetic_boundary(x1) + eps ? 1 : -1);
  }
  return data;
}

std::vector<std::size_t> future_subsample(std::span<const Label> labels,
                                          double fraction,
                                          std::uint64_t seed) {
  const std::size_t n = labels.size();
  const auto m = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<std::size_t> pick(idx.begin(),
                                  idx.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(pick.begin(), pick.end());
    bool pos = false, neg = false;
    for (auto i : pick) (labels[i] == 1 ? pos : neg) = true;
    if (pos && neg) return pick;
  }
  throw Error(ErrorCode::kSingleClassData,
              "future-model subsample stayed single-class after 10 draws");
}

std::vector<MlpModel> simulate_future_models(const Matrix& features,
                                             std::span<const Label> labels,
                                             const FutureModelConfig& config) {
  if (!(config.fraction > 0.0 && config.fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fraction must lie in (0,1]");
  }
  config.train.validate();
  require_finite(features, "features");
  check_labels(labels, features.rows());

  std::vector<std::optional<MlpModel>> slots(config.n_models);
  parallel_for(config.n_models, [&](std::size_t i) {
    TrainConfig tc = config.train;
    tc.seed = config.train.seed + i;
    const auto rows = future_subsample(labels, config.fraction, tc.seed);
    Matrix sub(static_cast<Eigen::Index>(rows.size()), features.cols());
    std::vector<Label> sub_labels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sub.row(static_cast<Eigen::Index>(r)) =
          features.row(static_cast<Eigen::Index>(rows[r]));
      sub_labels[r] = labels[rows[r]];
    }
    slots[i].emplace(train_mlp(sub, sub_labels, tc));
  });
  std::vector<MlpModel> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace cvas
