#include "cvas/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cvas/error.hpp"
#include "cvas/random.hpp"

namespace cvas {
namespace {

constexpr int kMaxBisections = 60;
constexpr std::size_t kDistanceGuardRows = 2000;

}  // namespace

void SamplerConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (r_p && !(*r_p > 0.0)) throw Error(ErrorCode::kInvalidArgument, "r_p must be > 0");
  if (n_p < 2) throw Error(ErrorCode::kInvalidArgument, "n_p must be >= 2");
  if (!(line_search_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "line_search_tol must be > 0");
  }
}

double max_pairwise_distance(const Matrix& dataset, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(dataset.rows());
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (n > kDistanceGuardRows) {
    Rng rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(kDistanceGuardRows);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const double d2 = (dataset.row(static_cast<Eigen::Index>(rows[i])) -
                         dataset.row(static_cast<Eigen::Index>(rows[j])))
                            .squaredNorm();
      best = std::max(best, d2);
    }
  }
  return std::sqrt(best);
}

double resolve_radius(const SamplerConfig& config, const Matrix& dataset) {
  if (config.r_p) return *config.r_p;
  const double r = 0.05 * max_pairwise_distance(dataset);
  if (!(r > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset has zero spread; cannot derive r_p");
  }
  return r;
}

Vector bisect_to_boundary(const std::function<double(const Vector&)>& probability,
                          double threshold, const Vector& from, const Vector& to,
                          double tol, const BracketObserver& observer) {
  double g_lo = probability(from);
  double g_hi = probability(to);
  if (std::abs(g_lo - threshold) <= tol) return from;
  if (std::abs(g_hi - threshold) <= tol) return to;
  const bool lo_above = g_lo >= threshold;
  if (lo_above == (g_hi >= threshold)) {
    throw Error(ErrorCode::kInvalidArgument,
                "segment endpoints do not straddle the threshold");
  }
  const double length = (to - from).norm();
  double t_lo = 0.0, t_hi = 1.0;
  for (int it = 0; it < kMaxBisections; ++it) {
    if (observer) observer(t_lo, t_hi, g_lo, g_hi);
    if ((t_hi - t_lo) * length <= tol) break;
    const double t_mid = 0.5 * (t_lo + t_hi);
    const Vector x_mid = from + t_mid * (to - from);
    const double g_mid = probability(x_mid);
    if (std::abs(g_mid - threshold) <= tol) return x_mid;
    if ((g_mid >= threshold) == lo_above) {
      t_lo = t_mid;
      g_lo = g_mid;
    } else {
      t_hi = t_mid;
      g_hi = g_mid;
    }
  }
  return from + (0.5 * (t_lo + t_hi)) * (to - from);
}

Vector find_boundary_point(const Vector& x0, const Matrix& dataset,
                           const MlpModel& model, const SamplerConfig& config) {
  config.validate();
  if (x0.size() != model.input_dim() || dataset.cols() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "x0/dataset vs model dimension");
  }
  const Label own = model.label(x0);
  const auto labels = model.labels(dataset);
  std::vector<std::pair<double, Eigen::Index>> candidates;
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] != own) {
      candidates.emplace_back((dataset.row(i).transpose() - x0).lpNorm<1>(), i);
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoOppositeClassPrototypes,
                "no dataset row has the label opposite to x0");
  }
  const std::size_t k = std::min(config.k, candidates.size());
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(k),
                    candidates.end());

  auto prob = [&model](const Vector& x) { return model.probability(x); };
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const Vector proto = dataset.row(candidates[c].second).transpose();
    const Vector xb = bisect_to_boundary(prob, model.threshold(), x0, proto,
                                         config.line_search_tol);
    const double dist = (xb - x0).norm();
    if (dist < best_dist) {
      best_dist = dist;
      best = xb;
    }
  }
  return best;
}

BoundarySample synthesize(const Vector& x0, const Matrix& dataset,
                          const MlpModel& model, const SamplerConfig& config) {
  const Vector xb = find_boundary_point(x0, dataset, model, config);
  const double radius = resolve_radius(config, dataset);
  Rng rng(derive_seed(config.seed, seed_stream::kSampler));
  const Matrix pts = sample_uniform_ball(xb, radius, config.n_p, rng);
  const auto labels = model.labels(pts);
  const auto n_pos = static_cast<Eigen::Index>(
      std::count(labels.begin(), labels.end(), 1));
  const auto n_neg = pts.rows() - n_pos;
  if (n_pos < 2 || n_neg < 2) {
    throw Error(ErrorCode::kDegenerateSample,
                "ball sample has " + std::to_string(n_pos) + " positive and " +
                    std::to_string(n_neg) + " negative points");
  }
  BoundarySample out{xb, Matrix(n_pos, pts.cols()), Matrix(n_neg, pts.cols()),
                     radius};
  Eigen::Index ip = 0, in = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == 1) out.positives.row(ip++) = pts.row(i);
    else out.negatives.row(in++) = pts.row(i);
  }
  return out;
}

}  // namespace cvas
