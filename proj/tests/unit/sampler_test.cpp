#include "cvas/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cvas/error.hpp"
#include "cvas/random.hpp"
#include "oracles.hpp"

namespace cvas {
namespace {

// Logistic in x_1 crossing 0.5 at x_1 = c.
MlpModel axis_model(int d, double c, double scale = 5.0) {
  Vector w = Vector::Zero(d);
  w[0] = 1.0;
  return MlpModel::from_linear_logit(w, c, scale);
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()),
           static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

TEST(SamplerTest, OneDimensionalBisection) {
  const MlpModel model = axis_model(1, 1.0);
  SamplerConfig config;
  config.line_search_tol = 1e-10;
  const Vector xb = find_boundary_point(Vector::Zero(1), rows({{2.0}}), model, config);
  EXPECT_NEAR(xb[0], 1.0, 1e-8);
}

TEST(SamplerTest, StartOnBoundaryReturnsStart) {
  const MlpModel model = axis_model(1, 1.0);
  Vector x0(1);
  x0 << 1.0 - 1e-12;
  SamplerConfig config;
  const Vector xb = find_boundary_point(x0, rows({{-3.0}, {2.0}}), model, config);
  EXPECT_NEAR(xb[0], x0[0], config.line_search_tol);
}

TEST(SamplerTest, NoOppositePrototypes) {
  const MlpModel model = axis_model(2, 1.0);
  try {
    find_boundary_point(Vector::Zero(2), rows({{-1, 0}, {-2, 3}}), model, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoOppositeClassPrototypes);
  }
}

TEST(SamplerTest, PicksNearestBoundaryPoint) {
  // Boundary x_1 = 1; the prototype at (3, 0) crosses at distance 1, the one
  // at (1.5, 4) crosses much further away.
  const MlpModel model = axis_model(2, 1.0);
  SamplerConfig config;
  config.line_search_tol = 1e-10;
  const Vector xb = find_boundary_point(Vector::Zero(2), rows({{3, 0}, {1.5, 4}}), model, config);
  EXPECT_NEAR(xb[0], 1.0, 1e-8);
  EXPECT_NEAR(xb[1], 0.0, 1e-8);
}

TEST(SamplerTest, BracketInvariantHolds) {
  auto g = [](const Vector& x) { return 1.0 / (1.0 + std::exp(-3.0 * (x[0] - 0.3))); };
  Vector from(1), to(1);
  from << -4.0;
  to << 5.0;
  int calls = 0;
  const Vector xb = bisect_to_boundary(g, 0.5, from, to, 1e-12,
                                       [&](double t_lo, double t_hi, double g_lo, double g_hi) {
                                         ++calls;
                                         EXPECT_LT(t_lo, t_hi);
                                         EXPECT_NE(g_lo >= 0.5, g_hi >= 0.5);
                                       });
  EXPECT_GT(calls, 10);
  EXPECT_LE(calls, 60);
  EXPECT_NEAR(xb[0], 0.3, 1e-9);
}

TEST(SamplerTest, SampleIsPureAndInsideBall) {
  const MlpModel model = axis_model(3, 0.0, 2.0);
  Matrix data(4, 3);
  data << -1, 0, 0, 1, 0, 0, 2, 1, 1, -2, 1, -1;
  SamplerConfig config;
  config.r_p = 0.7;
  config.n_p = 500;
  config.seed = 77;
  const BoundarySample s = synthesize(Vector::Constant(3, -0.5), data, model, config);
  EXPECT_EQ(s.positives.rows() + s.negatives.rows(), 500);
  for (Eigen::Index i = 0; i < s.positives.rows(); ++i) {
    EXPECT_EQ(model.label(s.positives.row(i).transpose()), 1);
    EXPECT_LE((s.positives.row(i).transpose() - s.x_b).norm(), 0.7 + 1e-12);
  }
  for (Eigen::Index i = 0; i < s.negatives.rows(); ++i) {
    EXPECT_EQ(model.label(s.negatives.row(i).transpose()), -1);
    EXPECT_LE((s.negatives.row(i).transpose() - s.x_b).norm(), 0.7 + 1e-12);
  }
  const BoundarySample again = synthesize(Vector::Constant(3, -0.5), data, model, config);
  EXPECT_EQ(s.x_b, again.x_b);
  EXPECT_EQ(s.positives, again.positives);
  EXPECT_EQ(s.negatives, again.negatives);
}

TEST(SamplerTest, HalfspaceSplitsBallEvenly) {
  const MlpModel model = axis_model(2, 0.0, 20.0);
  SamplerConfig config;
  config.r_p = 0.5;
  config.n_p = 4000;
  config.seed = 5;
  const BoundarySample s = synthesize(rows({{-1, 0}}).row(0).transpose(),
                                      rows({{1, 0}, {-1, 0}}), model, config);
  EXPECT_NEAR(s.x_b[0], 0.0, 1e-7);
  const double frac = static_cast<double>(s.positives.rows()) / 4000.0;
  EXPECT_NEAR(frac, 0.5, 0.05);
}

TEST(SamplerTest, DegenerateSample) {
  // Three points cannot fill two partitions of at least two rows each.
  const MlpModel model = axis_model(1, 0.0);
  SamplerConfig config;
  config.r_p = 0.5;
  config.n_p = 3;
  try {
    synthesize(rows({{-1}}).row(0).transpose(), rows({{1}}), model, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSample);
  }
}

TEST(SamplerTest, UniformBallRadiiPassKsTest) {
  for (int d = 1; d <= 5; ++d) {
    Rng rng(100 + d);
    const double r = 2.5;
    const Vector c = Vector::LinSpaced(d, -1.0, 1.0);
    const Matrix pts = sample_uniform_ball(c, r, 10000, rng);
    std::vector<double> radii(10000);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      radii[static_cast<std::size_t>(i)] = (pts.row(i).transpose() - c).norm();
    }
    std::sort(radii.begin(), radii.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double f = std::pow(radii[i] / r, d);
      ks = std::max({ks, std::abs(f - static_cast<double>(i) / 1e4),
                     std::abs(f - static_cast<double>(i + 1) / 1e4)});
    }
    // 0.1% critical value of the one-sample KS statistic.
    EXPECT_LT(ks, 1.95 / std::sqrt(1e4)) << "d=" << d;
    EXPECT_LE(radii.back(), r);
  }
}

TEST(SamplerTest, UniformBallMeanNearCenter) {
  const int d = 3;
  Rng rng(9);
  const Vector c = Vector::Constant(d, 4.0);
  const double r = 1.0;
  const std::size_t n = 10000;
  const Matrix pts = sample_uniform_ball(c, r, n, rng);
  const Vector mean = pts.colwise().mean().transpose();
  // Per-coordinate variance of the uniform ball is r^2 / (d + 2).
  const double sigma = std::sqrt(r * r / (d + 2) / static_cast<double>(n));
  for (int j = 0; j < d; ++j) EXPECT_NEAR(mean[j], c[j], 3 * sigma);
}

TEST(SamplerTest, MaxPairwiseDistance) {
  EXPECT_NEAR(max_pairwise_distance(rows({{0, 0}, {3, 4}, {1, 1}})), 5.0, 1e-12);
  SamplerConfig config;
  EXPECT_NEAR(resolve_radius(config, rows({{0, 0}, {3, 4}})), 0.25, 1e-12);
  config.r_p = 0.1;
  EXPECT_EQ(resolve_radius(config, rows({{0, 0}, {3, 4}})), 0.1);
}

TEST(SamplerTest, ConfigValidation) {
  SamplerConfig config;
  config.k = 0;
  EXPECT_THROW(config.validate(), Error);
  config = {};
  config.n_p = 1;
  EXPECT_THROW(config.validate(), Error);
  config = {};
  config.r_p = -1.0;
  EXPECT_THROW(config.validate(), Error);
}

TEST(SamplerTest, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, seed_stream::kSampler), derive_seed(1, seed_stream::kFidelity));
  EXPECT_NE(derive_seed(1, seed_stream::kSampler, 0), derive_seed(1, seed_stream::kSampler, 1));
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
}

}  // namespace
}  // namespace cvas
