#pragma once

#include <cstddef>

#include "cvas/linalg.hpp"

namespace cvas {

// Per-class first and second moments of a synthetic sample set.
struct ClassMoments {
  Vector mean;
  Matrix covariance;  // unbiased (m - 1) normalization, exactly symmetric
  std::size_t count = 0;
};

ClassMoments estimate_moments(const Matrix& samples);

// eps = max(1e-10, 1e-12 * trace / d)
double ridge_epsilon(const Matrix& covariance);

// covariance + ridge_epsilon(covariance) * I
Matrix ridge(const Matrix& covariance);

// Mahalanobis distance from `mean` to the halfspace {x : w^T x - b >= 0}:
// |w^T mean - b| / sqrt(w^T S w) when w^T mean < b, else 0.
double halfspace_distance(const Vector& mean, const Matrix& covariance,
                          const Vector& w, double b);

// lambda_max / lambda_min of the ridged matrix; the largest finite double
// when the smallest eigenvalue is <= 0 before ridging.
double condition_number(const Matrix& covariance);

// Symmetric square root and inverse square root through an eigendecomposition.
Matrix symmetric_sqrt(const Matrix& spd);
Matrix symmetric_inv_sqrt(const Matrix& spd);

}  // namespace cvas
