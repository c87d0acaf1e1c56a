#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>

#include "cvas/blackbox.hpp"
#include "cvas/linalg.hpp"

namespace cvas {

struct SamplerConfig {
  std::size_t k = 10;
  // Ball radius; when unset, 5% of the dataset's maximum pairwise distance.
  std::optional<double> r_p;
  std::size_t n_p = 1000;
  double line_search_tol = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Synthetic neighbourhood of a boundary point, partitioned by model label.
struct BoundarySample {
  Vector x_b;
  Matrix positives;  // model label +1
  Matrix negatives;  // model label -1
  double radius = 0.0;
};

// Maximum pairwise L2 distance between rows; exact for n <= 2000, otherwise
// over a seeded 2000-row subsample.
double max_pairwise_distance(const Matrix& dataset, std::uint64_t seed = 0);

// Resolved ball radius for a configuration.
double resolve_radius(const SamplerConfig& config, const Matrix& dataset);

// Callback invoked once per bisection iteration with the current bracket
// (t_lo, t_hi) along the segment and the probabilities at both ends.
using BracketObserver =
    std::function<void(double t_lo, double t_hi, double g_lo, double g_hi)>;

// Bisection along [from, to] for a threshold crossing of `probability`.
// The endpoints must straddle `threshold`. Stops when the bracket length
// in x-space is <= tol, when |g - threshold| <= tol at the midpoint, or
// after 60 halvings.
Vector bisect_to_boundary(const std::function<double(const Vector&)>& probability,
                          double threshold, const Vector& from, const Vector& to,
                          double tol, const BracketObserver& observer = {});

// Nearest (in L2 to x0) of the boundary points found between x0 and its
// k L1-nearest dataset rows of the opposite model label.
Vector find_boundary_point(const Vector& x0, const Matrix& dataset,
                           const MlpModel& model, const SamplerConfig& config);

BoundarySample synthesize(const Vector& x0, const Matrix& dataset,
                          const MlpModel& model, const SamplerConfig& config);

}  // namespace cvas
