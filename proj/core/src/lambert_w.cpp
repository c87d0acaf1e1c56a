#include "cvas/lambert_w.hpp"

#include <cmath>
#include <limits>

#include "cvas/error.hpp"

namespace cvas {
namespace {

// exp(-1) split into a double and its rounding error.
constexpr double kInvE = 0.36787944117144233;
constexpr double kInvELo = -1.2428753672788363e-17;
constexpr double kE = 2.718281828459045;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series around the branch point in p = -sqrt(2 (1 + e x)).
double branch_point_series(double x) {
  const double q = (x + kInvE) + kInvELo;  // x + 1/e without cancellation
  const double p = -std::sqrt(std::max(0.0, 2.0 * kE * q));
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
}

}  // namespace

double lambert_w_minus1(double x) {
  if (!std::isfinite(x) || !(x < 0.0)) {
    throw Error(ErrorCode::kDomainError, "W_{-1} needs x in [-1/e, 0)");
  }
  if (x <= -kInvE) {
    // Accept a few ulps of rounding below -1/e as the branch point.
    if (x >= -kInvE * (1.0 + 4.0 * kEps)) return -1.0;
    throw Error(ErrorCode::kDomainError, "W_{-1} needs x >= -1/e");
  }

  if (x < -0.25) {
    // Halley iteration on w e^w - x from the branch-point series.
    double w = branch_point_series(x);
    for (int it = 0; it < 32; ++it) {
      const double wp1 = w + 1.0;
      if (std::abs(wp1) < 1e-7) break;  // series already exact to rounding
      const double ew = std::exp(w);
      const double f = w * ew - x;
      const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
      w -= step;
      if (std::abs(step) <= 2.0 * kEps * std::abs(w)) break;
    }
    return std::min(w, -1.0);
  }

  // Away from the branch point: Newton on w + log(-w) = log(-x), which stays
  // well scaled even when exp(w) is tiny.
  const double lx = std::log(-x);
  const double l2 = std::log(-lx);
  double w = lx - l2 + l2 / lx;
  for (int it = 0; it < 64; ++it) {
    const double g = w + std::log(-w) - lx;
    const double step = g / (1.0 + 1.0 / w);
    w -= step;
    if (w > -1.0) w = -1.0 - 1e-12;
    if (std::abs(step) <= 2.0 * kEps * std::abs(w)) break;
  }
  return std::min(w, -1.0);
}

double logdet_inflation(double rho) {
  if (std::isnan(rho)) throw Error(ErrorCode::kDomainError, "rho is NaN");
  if (rho < 0.0) throw Error(ErrorCode::kNegativeRadius, "rho must be >= 0");
  if (rho == 0.0) return 1.0;
  if (std::isinf(rho)) return rho;
  // c = 1 + delta with delta - log1p(delta) = rho; h is convex in delta.
  double delta = std::sqrt(2.0 * rho) + rho;
  for (int it = 0; it < 200; ++it) {
    const double h = delta - std::log1p(delta) - rho;
    const double slope = delta / (1.0 + delta);
    const double step = h / slope;
    double next = delta - step;
    if (!(next > 0.0)) next = 0.5 * delta;
    const bool done = std::abs(next - delta) <= 4.0 * kEps * next;
    delta = next;
    if (done) break;
  }
  return 1.0 + delta;
}

}  // namespace cvas
