#include "cvas/moments.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cvas/error.hpp"
#include "oracles.hpp"

namespace cvas {
namespace {

TEST(MomentsTest, TwoPointEstimate) {
  Matrix x(2, 2);
  x << 0, 0, 2, 0;
  const ClassMoments m = estimate_moments(x);
  EXPECT_EQ(m.count, 2u);
  EXPECT_DOUBLE_EQ(m.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(m.mean[1], 0.0);
  EXPECT_DOUBLE_EQ(m.covariance(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(m.covariance(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.covariance(1, 1), 0.0);
}

TEST(MomentsTest, IdenticalRowsGiveZeroCovariance) {
  Matrix x = Matrix::Constant(5, 3, 1.25);
  const ClassMoments m = estimate_moments(x);
  EXPECT_EQ(m.covariance, Matrix::Zero(3, 3));
}

TEST(MomentsTest, MonteCarloCovariance) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  Matrix x(100000, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = n01(rng);
    x(i, 1) = 2.0 * n01(rng);
  }
  const ClassMoments m = estimate_moments(x);
  EXPECT_NEAR(m.covariance(0, 0), 1.0, 0.05);
  EXPECT_NEAR(m.covariance(1, 1), 4.0, 0.05);
  EXPECT_NEAR(m.covariance(0, 1), 0.0, 0.05);
}

TEST(MomentsTest, CovarianceExactlySymmetricAndPsd) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    Matrix x(7, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) = testing::random_vector(4, rng, 3.0);
    const ClassMoments m = estimate_moments(x);
    EXPECT_EQ(m.covariance, m.covariance.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(MomentsTest, TooFewSamples) {
  try {
    estimate_moments(Matrix::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewSamples);
  }
}

TEST(MomentsTest, RidgeEpsilon) {
  EXPECT_DOUBLE_EQ(ridge_epsilon(Matrix::Identity(3, 3)), 1e-10);
  EXPECT_DOUBLE_EQ(ridge_epsilon(Matrix::Identity(2, 2) * 1e4), 1e-8);
  EXPECT_EQ(ridge(Matrix::Zero(2, 2)), Matrix::Identity(2, 2) * 1e-10);
}

TEST(MomentsTest, HalfspaceDistanceExamples) {
  const Vector mu = Vector::Zero(2);
  const Matrix eye = Matrix::Identity(2, 2);
  EXPECT_NEAR(halfspace_distance(mu, eye, Vector::Unit(2, 0), 2.0), 2.0, 1e-9);
  EXPECT_EQ(halfspace_distance(mu, eye, Vector::Unit(2, 0), -1.0), 0.0);
  Matrix s(2, 2);
  s << 5, 2, 2, 1;
  Vector w(2);
  w << -0.1, 0.2;
  EXPECT_NEAR(halfspace_distance(mu, s, w, 0.5), 5.0, 1e-8);
}

TEST(MomentsTest, HalfspaceDistanceScaleInvariant) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Matrix s = testing::random_spd(3, rng);
    const Vector mu = testing::random_vector(3, rng);
    const Vector w = testing::random_vector(3, rng);
    const double b = w.dot(mu) + 1.0 + t * 0.1;
    const double base = halfspace_distance(mu, s, w, b);
    for (double scale : {1e-3, 0.5, 7.0, 1e4}) {
      EXPECT_NEAR(halfspace_distance(mu, s, scale * w, scale * b), base, 1e-12 * (1 + base));
    }
  }
}

TEST(MomentsTest, HalfspaceDistanceZeroExactlyInside) {
  const Matrix s = Matrix::Identity(2, 2);
  Vector mu(2);
  mu << 1.0, 1.0;
  Vector w(2);
  w << 1.0, -1.0;
  EXPECT_EQ(halfspace_distance(mu, s, w, 0.0), 0.0);
  EXPECT_GT(halfspace_distance(mu, s, w, 1e-9), 0.0);
}

TEST(MomentsTest, HalfspaceDistanceZeroSlope) {
  try {
    halfspace_distance(Vector::Zero(2), Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroSlope);
  }
}

TEST(MomentsTest, ConditionNumber) {
  EXPECT_NEAR(condition_number(Matrix::Identity(3, 3)), 1.0, 1e-12);
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 4, 1;
  EXPECT_NEAR(condition_number(d), 4.0, 1e-9);
  Matrix s(2, 2);
  s << 5, 2, 2, 1;
  const double expected = (3 + 2 * std::sqrt(2.0)) / (3 - 2 * std::sqrt(2.0));
  EXPECT_NEAR(condition_number(s), expected, 1e-6);
  EXPECT_NEAR(expected, 33.97, 0.01);
  Matrix singular(2, 2);
  singular << 1, 1, 1, 1;
  EXPECT_EQ(condition_number(singular), std::numeric_limits<double>::max());
}

TEST(MomentsTest, SymmetricRoots) {
  std::mt19937_64 rng(8);
  const Matrix s = testing::random_spd(4, rng);
  const Matrix r = symmetric_sqrt(s);
  const Matrix ri = symmetric_inv_sqrt(s);
  EXPECT_LE((r * r - s).norm(), 1e-10 * s.norm());
  EXPECT_LE((ri * s * ri - Matrix::Identity(4, 4)).norm(), 1e-10);
}

}  // namespace
}  // namespace cvas
