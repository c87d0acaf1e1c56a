#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cvas/linalg.hpp"

namespace cvas {

// Hidden widths of the black-box network: d -> 20 -> 50 -> 20 -> 1.
inline constexpr std::array<int, 3> kHiddenWidths = {20, 50, 20};

struct TrainConfig {
  int epochs = 1000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct Prediction {
  double probability;  // g(x), strictly inside (0, 1)
  Label label;         // +1 iff probability >= threshold
  Vector gradient;     // dg/dx
};

// ReLU MLP with a sigmoid head. Immutable once built; share freely.
class MlpModel {
 public:
  MlpModel(std::vector<Matrix> weights, std::vector<Vector> biases,
           double threshold = 0.5);

  // He-uniform initialization, zero biases.
  static MlpModel initialize(int input_dim, std::uint64_t seed,
                             double threshold = 0.5);

  // A network whose logit equals scale * (w^T x - b) for every x with
  // w^T x - b > -offset. Used for hand-built models with a known boundary.
  static MlpModel from_linear_logit(const Vector& w, double b, double scale,
                                    double offset = 1e3,
                                    double threshold = 0.5);

  int input_dim() const noexcept { return layer_dims_.front(); }
  const std::vector<int>& layer_dims() const noexcept { return layer_dims_; }
  const std::vector<Matrix>& weights() const noexcept { return weights_; }
  const std::vector<Vector>& biases() const noexcept { return biases_; }
  double threshold() const noexcept { return threshold_; }

  double logit(const Vector& x) const;
  double probability(const Vector& x) const;
  Label label(const Vector& x) const;

  // Probabilities for every row of `x`.
  Vector probabilities(const Matrix& x) const;
  std::vector<Label> labels(const Matrix& x) const;

 private:
  void check_input(Eigen::Index dim) const;

  std::vector<int> layer_dims_;
  std::vector<Matrix> weights_;  // weights_[l] is out x in
  std::vector<Vector> biases_;
  double threshold_;
};

Prediction predict(const MlpModel& model, const Vector& x);

// Full-batch Adam on mean binary cross-entropy. Labels are +/-1.
MlpModel train_mlp(const Matrix& features, std::span<const Label> labels,
                   const TrainConfig& config);

// Mean BCE of the model on a labeled set, probabilities clamped to
// [1e-12, 1 - 1e-12].
double bce_loss(const MlpModel& model, const Matrix& features,
                std::span<const Label> labels);

double accuracy(const MlpModel& model, const Matrix& features,
                std::span<const Label> labels);

struct LabeledData {
  Matrix features;
  std::vector<Label> labels;
};

// Quartic boundary used for the 2-d benchmark:
// 1 + x1 + 2 x1^2 + x1^3 - x1^4.
double synthetic_boundary(double x1) noexcept;

// Uniform on [-2,4] x [-2,7]; label +1 iff x2 >= boundary(x1) + eps,
// eps ~ N(0, noise_std^2).
LabeledData generate_synthetic(std::size_t n, double noise_std,
                               std::uint64_t seed);

struct FutureModelConfig {
  std::size_t n_models = 100;
  double fraction = 0.8;
  TrainConfig train;
};

// Trains n_models networks, each on an independent subsample without
// replacement of ceil(fraction * n) rows. Member i uses seed
// train.seed + i for both subsampling and initialization.
std::vector<MlpModel> simulate_future_models(const Matrix& features,
                                             std::span<const Label> labels,
                                             const FutureModelConfig& config);

// Row indices used for member `index` of the future ensemble.
std::vector<std::size_t> future_subsample(std::span<const Label> labels,
                                          double fraction,
                                          std::uint64_t seed);

// Binary model container, see README for the byte layout.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);
std::string serialize_model(const MlpModel& model);
MlpModel deserialize_model(std::string_view bytes);

}  // namespace cvas
