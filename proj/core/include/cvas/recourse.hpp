#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cvas/blackbox.hpp"
#include "cvas/error.hpp"
#include "cvas/linalg.hpp"
#include "cvas/sampler.hpp"
#include "cvas/surrogate.hpp"

namespace cvas {

enum class Actionability { kFree, kImmutable, kNonDecreasing };

std::string_view actionability_name(Actionability a) noexcept;
Actionability parse_actionability(std::string_view name);

struct FeatureAction {
  Actionability kind = Actionability::kFree;
  std::vector<double> grid;  // allowed deltas, sorted, unique, contains 0
};

// Per-feature discrete action grids.
struct ActionSpec {
  std::vector<FeatureAction> features;

  void validate() const;
};

// Deltas from x0 to the 10th..90th percentiles of each training marginal,
// filtered by actionability, plus 0.
ActionSpec default_action_grids(const Vector& x0, const Matrix& train,
                                std::span<const Actionability> kinds);

struct RecourseResult {
  Vector x_r;
  double cost = 0.0;  // |x_r - x0|_1
  bool surrogate_valid = false;
  bool blackbox_valid = false;  // only filled in when a model is consulted
};

// Thrown by wachter_recourse when every restart ends below the threshold;
// carries the last attempt.
class NoValidRecourseError : public Error {
 public:
  explicit NoValidRecourseError(RecourseResult result)
      : Error(ErrorCode::kNoValidRecourse,
              "no restart reached the favorable class"),
        result_(std::move(result)) {}

  const RecourseResult& result() const noexcept { return result_; }

 private:
  RecourseResult result_;
};

// Minimizer of |x - x0|_1 subject to w^T x >= b: moves the lowest-index
// coordinate among argmax |w_j|.
RecourseResult l1_projection(const Vector& x0, const Surrogate& surrogate);

// Minimizer of sum |delta_j| over delta_j in grid_j subject to
// w^T (x0 + delta) >= b, by best-first branch and bound.
RecourseResult actionable_recourse(const Vector& x0, const Surrogate& surrogate,
                                   const ActionSpec& actions);

// Slack used for w^T x >= b in the discrete search: 1e-12 (1 + |b|).
double actionable_tolerance(double b) noexcept;

struct WachterConfig {
  double lambda0 = 0.1;
  double step = 0.01;
  int steps = 1000;
  int retries = 10;
  // The loss pulls g(x) toward this value. 1.0 rather than the threshold:
  // the threshold itself is a fixed point the iterate never crosses.
  double target = 1.0;
};

// Gradient descent on (g(x) - target)^2 + lambda |x - x0|_1, stopping as
// soon as the model label turns +1; halves lambda on each restart.
RecourseResult wachter_recourse(const MlpModel& model, const Vector& x0,
                                const WachterConfig& config = {});

enum class RecourseMode { kProjection, kActionable };

std::string_view recourse_mode_name(RecourseMode mode) noexcept;
RecourseMode parse_recourse_mode(std::string_view name);

struct LocalFit {
  Surrogate surrogate;
  Vector x_b;
  ClassMoments pos;
  ClassMoments neg;
};

// synthesize -> estimate_moments -> solve_cvas.
LocalFit fit_local_surrogate(const MlpModel& model, const Vector& x0,
                             const Matrix& dataset, const SamplerConfig& sampler,
                             const Divergence& divergence);

// Full pipeline; blackbox_valid is the model label at x_r.
RecourseResult generate_recourse(const MlpModel& model, const Vector& x0,
                                 const Matrix& dataset,
                                 const SamplerConfig& sampler,
                                 const Divergence& divergence, RecourseMode mode,
                                 const ActionSpec* actions = nullptr);

}  // namespace cvas
