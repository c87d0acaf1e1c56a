#include "cvas/moments.hpp"

#include <cmath>
#include <limits>

#include "cvas/error.hpp"

namespace cvas {

ClassMoments estimate_moments(const Matrix& samples) {
  const auto m = samples.rows();
  if (m < 2) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 2 samples, got " + std::to_string(m));
  }
  if (!samples.allFinite()) {
    throw Error(ErrorCode::kNonFiniteInput, "samples contain NaN/Inf");
  }
  ClassMoments out;
  out.count = static_cast<std::size_t>(m);
  out.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - out.mean.transpose();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
  out.covariance = 0.5 * (cov + cov.transpose());
  return out;
}

double ridge_epsilon(const Matrix& covariance) {
  const double d = static_cast<double>(covariance.rows());
  return std::max(1e-10, 1e-12 * covariance.trace() / d);
}

Matrix ridge(const Matrix& covariance) {
  Matrix out = covariance;
  out.diagonal().array() += ridge_epsilon(covariance);
  return out;
}

double halfspace_distance(const Vector& mean, const Matrix& covariance,
                          const Vector& w, double b) {
  if (mean.size() != w.size() || covariance.rows() != w.size() ||
      covariance.cols() != w.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "halfspace_distance operands");
  }
  if (w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  const double gap = w.dot(mean) - b;
  if (gap >= 0.0) return 0.0;
  double spread = w.dot(covariance * w);
  if (!(spread > 0.0)) spread = w.dot(ridge(covariance) * w);
  if (!(spread > 0.0)) {
    throw Error(ErrorCode::kSingularCovariance,
                "w^T S w is not positive after ridge");
  }
  return -gap / std::sqrt(spread);
}

double condition_number(const Matrix& covariance) {
  const Matrix sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> raw(sym, Eigen::EigenvaluesOnly);
  if (raw.eigenvalues().minCoeff() <= 0.0) {
    return std::numeric_limits<double>::max();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(ridge(sym),
                                               Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  return ev.maxCoeff() / ev.minCoeff();
}

namespace {

Matrix spectral_power(const Matrix& spd, double power) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (spd + spd.transpose()));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "eigendecomposition failed");
  }
  Vector ev = solver.eigenvalues();
  if (power < 0.0 && ev.minCoeff() <= 0.0) {
    throw Error(ErrorCode::kSingularCovariance, "matrix is not positive definite");
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    ev(i) = std::pow(std::max(ev(i), 0.0), power);
  }
  const Matrix& q = solver.eigenvectors();
  Matrix out = q * ev.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

Matrix symmetric_sqrt(const Matrix& spd) { return spectral_power(spd, 0.5); }
Matrix symmetric_inv_sqrt(const Matrix& spd) { return spectral_power(spd, -0.5); }

}  // namespace cvas
