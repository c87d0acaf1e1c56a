#include "cvas/recourse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "cvas/moments.hpp"

namespace cvas {
namespace {

constexpr double kSurrogateSlack = 1e-9;

std::string lower(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '_') ch = '-';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

void check_slope(const Vector& x0, const Surrogate& s) {
  if (s.w.size() != x0.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "x0 vs surrogate dimension");
  }
  if (s.w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  if (!x0.allFinite()) throw Error(ErrorCode::kNonFiniteInput, "x0 not finite");
}

// Type-7 quantile of a sorted sample.
double quantile(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view actionability_name(Actionability a) noexcept {
  switch (a) {
    case Actionability::kFree: return "free";
    case Actionability::kImmutable: return "immutable";
    case Actionability::kNonDecreasing: return "non_decreasing";
  }
  return "unknown";
}

Actionability parse_actionability(std::string_view name) {
  const std::string s = lower(name);
  if (s == "free") return Actionability::kFree;
  if (s == "immutable") return Actionability::kImmutable;
  if (s == "non-decreasing" || s == "nondecreasing") return Actionability::kNonDecreasing;
  throw Error(ErrorCode::kInvalidArgument, "unknown actionability '" + std::string(name) + "'");
}

void ActionSpec::validate() const {
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& f = features[j];
    const std::string where = "feature " + std::to_string(j);
    if (f.grid.empty() || !std::is_sorted(f.grid.begin(), f.grid.end()) ||
        std::adjacent_find(f.grid.begin(), f.grid.end()) != f.grid.end()) {
      throw Error(ErrorCode::kInvalidArgument, where + ": grid must be sorted and unique");
    }
    if (!std::binary_search(f.grid.begin(), f.grid.end(), 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, where + ": grid must contain 0");
    }
    for (double v : f.grid) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, where + ": grid");
    }
    if (f.kind == Actionability::kImmutable && f.grid.size() != 1) {
      throw Error(ErrorCode::kInvalidArgument, where + ": immutable grid must be {0}");
    }
    if (f.kind == Actionability::kNonDecreasing && f.grid.front() < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, where + ": non-decreasing grid has a negative delta");
    }
  }
}

ActionSpec default_action_grids(const Vector& x0, const Matrix& train,
                                std::span<const Actionability> kinds) {
  const auto d = x0.size();
  if (train.cols() != d || static_cast<Eigen::Index>(kinds.size()) != d) {
    throw Error(ErrorCode::kDimensionMismatch, "x0, train and kinds must agree");
  }
  if (train.rows() == 0) throw Error(ErrorCode::kEmptyInput, "empty training set");
  ActionSpec spec;
  spec.features.resize(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    auto& f = spec.features[static_cast<std::size_t>(j)];
    f.kind = kinds[static_cast<std::size_t>(j)];
    f.grid = {0.0};
    if (f.kind != Actionability::kImmutable) {
      std::vector<double> col(train.col(j).data(), train.col(j).data() + train.rows());
      std::sort(col.begin(), col.end());
      for (int p = 1; p <= 9; ++p) {
        const double delta = quantile(col, 0.1 * p) - x0[j];
        if (f.kind == Actionability::kNonDecreasing && delta < 0.0) continue;
        f.grid.push_back(delta == 0.0 ? 0.0 : delta);  // folds -0
      }
    }
    std::sort(f.grid.begin(), f.grid.end());
    f.grid.erase(std::unique(f.grid.begin(), f.grid.end()), f.grid.end());
  }
  return spec;
}

double actionable_tolerance(double b) noexcept { return 1e-12 * (1.0 + std::abs(b)); }

RecourseResult l1_projection(const Vector& x0, const Surrogate& surrogate) {
  check_slope(x0, surrogate);
  RecourseResult out;
  out.x_r = x0;
  const double deficit = surrogate.b - surrogate.w.dot(x0);
  if (deficit > 0.0) {
    Eigen::Index j = 0;
    surrogate.w.cwiseAbs().maxCoeff(&j);  // first maximal index
    out.x_r[j] += deficit / surrogate.w[j];
  }
  out.cost = (out.x_r - x0).lpNorm<1>();
  out.surrogate_valid = surrogate.w.dot(out.x_r) - surrogate.b >= -kSurrogateSlack;
  return out;
}

std::string_view recourse_mode_name(RecourseMode mode) noexcept {
  return mode == RecourseMode::kProjection ? "projection" : "actionable";
}

RecourseMode parse_recourse_mode(std::string_view name) {
  const std::string s = lower(name);
  if (s == "projection") return RecourseMode::kProjection;
  if (s == "actionable") return RecourseMode::kActionable;
  throw Error(ErrorCode::kInvalidArgument, "unknown recourse mode '" + std::string(name) + "'");
}

RecourseResult wachter_recourse(const MlpModel& model, const Vector& x0,
                                const WachterConfig& config) {
  if (!(config.lambda0 >= 0.0) || !(config.step > 0.0) || config.steps < 0 ||
      config.retries < 0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid Wachter configuration");
  }
  RecourseResult out;
  out.x_r = x0;
  if (model.label(x0) == 1) {
    out.blackbox_valid = true;
    return out;
  }
  double lambda = config.lambda0;
  for (int attempt = 0; attempt <= config.retries; ++attempt, lambda *= 0.5) {
    Vector x = x0;
    bool valid = false;
    for (int s = 0; s < config.steps && !valid; ++s) {
      const Prediction p = predict(model, x);
      Vector grad = (2.0 * (p.probability - config.target)) * p.gradient;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double diff = x[j] - x0[j];
        if (diff != 0.0) grad[j] += lambda * (diff > 0.0 ? 1.0 : -1.0);
      }
      const Vector next = x - config.step * grad;
      if (!next.allFinite()) break;
      x = next;
      valid = model.label(x) == 1;
    }
    out.x_r = x;
    out.cost = (x - x0).lpNorm<1>();
    out.blackbox_valid = valid;
    if (valid) return out;
  }
  throw NoValidRecourseError(out);
}

LocalFit fit_local_surrogate(const MlpModel& model, const Vector& x0,
                             const Matrix& dataset, const SamplerConfig& sampler,
                             const Divergence& divergence) {
  const BoundarySample sample = synthesize(x0, dataset, model, sampler);
  LocalFit fit;
  fit.x_b = sample.x_b;
  fit.pos = estimate_moments(sample.positives);
  fit.neg = estimate_moments(sample.negatives);
  fit.surrogate = solve_cvas(fit.pos, fit.neg, divergence);
  return fit;
}

RecourseResult generate_recourse(const MlpModel& model, const Vector& x0,
                                 const Matrix& dataset,
                                 const SamplerConfig& sampler,
                                 const Divergence& divergence, RecourseMode mode,
                                 const ActionSpec* actions) {
  if (mode == RecourseMode::kActionable && actions == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "actionable mode needs an ActionSpec");
  }
  const LocalFit fit = fit_local_surrogate(model, x0, dataset, sampler, divergence);
  RecourseResult out = mode == RecourseMode::kProjection
                           ? l1_projection(x0, fit.surrogate)
                           : actionable_recourse(x0, fit.surrogate, *actions);
  out.blackbox_valid = model.label(out.x_r) == 1;
  return out;
}

}  // namespace cvas
