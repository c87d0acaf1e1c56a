// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cvas/blackbox.hpp"
#include "cvas/dataset.hpp"
#include "cvas/error.hpp"
#include "cvas/evalharness.hpp"
#include "cvas/lambert_w.hpp"
#include "cvas/moments.hpp"
#include "cvas/random.hpp"
#include "cvas/recourse.hpp"
#include "cvas/surrogate.hpp"
#include "oracles.hpp"

namespace {

using namespace cvas;
using cvas::testing::example_neg;
using cvas::testing::example_pos;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Equalization checks collected from every solve in criteria 5-7.
struct Equalization {
  int checks = 0;
  double worst = 0.0;

  void record(const Surrogate& s, const ClassMoments& pos, const ClassMoments& neg) {
    const auto& div = s.divergence;
    const double tp = tau(div.kind, div.rho_pos, ridge(pos.covariance), s.w);
    const double tn = tau(div.kind, div.rho_neg, ridge(neg.covariance), s.w);
    worst = std::max(worst, std::abs(std::abs(s.w.dot(pos.mean) - s.b) - s.kappa * tp));
    worst = std::max(worst, std::abs(std::abs(s.w.dot(neg.mean) - s.b) - s.kappa * tn));
    ++checks;
  }
};
Equalization g_equalization;

ClassMoments random_moments(int d, std::mt19937_64& rng) {
  ClassMoments m;
  m.mean = testing::random_vector(d, rng, 2.0);
  m.covariance = testing::random_spd(d, rng);
  m.count = 1000;
  return m;
}

bool near(const Vector& a, const Vector& b, double tol) {
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

Outcome criterion1() {
  const auto pos = example_pos(), neg = example_neg();
  const Surrogate s = solve_cvas(pos, neg, Divergence::nominal());
  const auto cv = coverage_validity(s, pos, neg);
  Vector w_ref(2);
  w_ref << -0.1, 0.2;
  const bool ok = near(s.w, w_ref, 1e-4) && std::abs(s.b - 0.5) <= 1e-4 &&
                  std::abs(cv.validity - 5.0) <= 1e-4;
  return {ok, fmt("w=(%.6f, %.6f)", s.w[0], s.w[1]) + fmt(" b=%.6f validity=%.6f", s.b, cv.validity)};
}

Outcome criterion2() {
  const auto pos = example_pos(), neg = example_neg();
  const Surrogate s = asymptotic_surrogate(pos, neg, AsymptoticFamily::kQuadraticOrBures, -1);
  const auto cv = coverage_validity(s, pos, neg);
  Vector w = s.w;
  double b = s.b;
  testing::normalize_plane(w, b);  // x1 + 10 = 0  <=>  w=(+-1,0), b=-+10
  const double sign = w[0] > 0 ? 1.0 : -1.0;
  const bool ok = std::abs(w[1]) <= 1e-4 && std::abs(b * sign + 10.0) <= 1e-4 &&
                  std::abs(cv.validity - 10.0 / std::sqrt(5.0)) <= 1e-4;
  return {ok, fmt("plane %.6f x1 %+.6f x2 = %.6f", w[0], w[1], b) +
                  fmt(", validity %.6f (10/sqrt5 = %.6f)", cv.validity, 10.0 / std::sqrt(5.0))};
}

Outcome criterion3() {
  const auto pos = example_pos(), neg = example_neg();
  const Surrogate s = asymptotic_surrogate(pos, neg, AsymptoticFamily::kFisherRaoOrLogDet, -1);
  const auto cv = coverage_validity(s, pos, neg);
  // x1 - 2 x2 + 10 = 0 with the orientation of the normalized slope.
  Vector w_ref(2);
  w_ref << -0.1, 0.2;
  const bool ok = near(s.w, w_ref, 1e-4) && std::abs(s.b - 1.0) <= 1e-4 &&
                  std::abs(cv.validity - 10.0) <= 1e-4;
  return {ok, fmt("w=(%.6f, %.6f)", s.w[0], s.w[1]) + fmt(" b=%.6f validity=%.6f", s.b, cv.validity)};
}

Outcome criterion4() {
  const auto pos = example_pos(), neg = example_neg();
  const Surrogate limit = asymptotic_surrogate(pos, neg, AsymptoticFamily::kFisherRaoOrLogDet, -1);
  const Surrogate s = solve_cvas(pos, neg, {DivergenceKind::kFisherRao, 0.0, 40.0});
  Vector w1 = s.w, w2 = limit.w;
  double b1 = s.b, b2 = limit.b;
  testing::normalize_plane(w1, b1);
  testing::normalize_plane(w2, b2);
  const double gap = std::max((w1 - w2).cwiseAbs().maxCoeff(), std::abs(b1 - b2));
  return {gap <= 1e-3, fmt("max |normalized (w,b) difference| = %.3e", gap)};
}

Outcome criterion5() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> radius(1e-6, 2.0);
  const DivergenceKind kinds[] = {DivergenceKind::kQuadratic, DivergenceKind::kBures,
                                  DivergenceKind::kFisherRao, DivergenceKind::kLogDet};
  double worst_rel = 0.0, worst_excess = 0.0;
  int n = 0;
  for (auto kind : kinds) {
    for (int i = 0; i < 50; ++i) {
      const Matrix s = testing::random_spd(3, rng, 0.2);
      const Vector w = testing::random_vector(3, rng);
      const double rho = radius(rng);
      const double closed = tau(kind, rho, s, w);
      const double numeric = testing::tau_oracle(kind, rho, s, w, rng);
      worst_rel = std::max(worst_rel, std::abs(closed - numeric) / closed);
      worst_excess = std::max(worst_excess, (numeric - closed) / closed);
      ++n;

      // A robust solve on the same covariance for the equalization suite.
      ClassMoments pos = random_moments(3, rng), neg = random_moments(3, rng);
      pos.covariance = s;
      const Surrogate sur = solve_cvas(pos, neg, {kind, rho, radius(rng)});
      g_equalization.record(sur, pos, neg);
    }
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst_rel <= 1e-3 && worst_excess <= 1e-6 && elapsed < 60.0;
  return {ok, fmt("%g instances, max rel error %.2e, max oracle excess %.2e", n, worst_rel,
                  worst_excess) +
                  fmt(", %.1f s", elapsed)};
}

Outcome criterion6() {
  std::mt19937_64 rng(6);
  double worst = 0.0;
  const DivergenceKind kinds[] = {DivergenceKind::kQuadratic, DivergenceKind::kBures,
                                  DivergenceKind::kFisherRao, DivergenceKind::kLogDet};
  for (int i = 0; i < 20; ++i) {
    const ClassMoments pos = random_moments(3, rng), neg = random_moments(3, rng);
    const Surrogate nominal = solve_cvas(pos, neg, Divergence::nominal());
    g_equalization.record(nominal, pos, neg);
    for (auto kind : kinds) {
      const Surrogate s = solve_cvas(pos, neg, {kind, 0.0, 0.0});
      g_equalization.record(s, pos, neg);
      worst = std::max(worst, (s.w - nominal.w).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(s.b - nominal.b));
    }
  }
  return {worst <= 1e-6, fmt("max |(w,b) - nominal| = %.2e over 20 instances x 4 divergences", worst)};
}

Outcome criterion7() {
  std::mt19937_64 rng(7);
  const double grid[] = {0.0, 0.5, 1.0, 2.0, 5.0};
  int violations = 0, sequences = 0;
  for (auto kind : {DivergenceKind::kFisherRao, DivergenceKind::kLogDet}) {
    for (int i = 0; i < 20; ++i) {
      const ClassMoments pos = random_moments(3, rng), neg = random_moments(3, rng);
      for (int part = 0; part < 2; ++part) {
        double prev_cov = 0.0, prev_val = 0.0;
        for (int k = 0; k < 5; ++k) {
          const Divergence div = part == 0 ? Divergence{kind, 0.0, grid[k]}
                                           : Divergence{kind, grid[k], 0.0};
          const Surrogate s = solve_cvas(pos, neg, div);
          g_equalization.record(s, pos, neg);
          const auto cv = coverage_validity(s, pos, neg);
          if (k > 0) {
            // Part (i): growing rho_neg trades coverage for validity;
            // part (ii): growing rho_pos does the reverse.
            const bool ok = part == 0 ? (cv.validity > prev_val && cv.coverage < prev_cov)
                                      : (cv.coverage > prev_cov && cv.validity < prev_val);
            violations += ok ? 0 : 1;
          }
          prev_cov = cv.coverage;
          prev_val = cv.validity;
        }
        ++sequences;
      }
    }
  }
  return {violations == 0, fmt("%g radius sequences, %g strict-monotonicity violations",
                               sequences, violations)};
}

Outcome criterion8() {
  return {g_equalization.checks > 0 && g_equalization.worst <= 1e-6,
          fmt("%g solves, max ||w^T mu_y - b| - kappa tau_y| = %.2e", g_equalization.checks,
              g_equalization.worst)};
}

Outcome criterion9() {
  double worst = 0.0;
  bool branch_ok = true;
  const int n = 1000;
  const double lo = std::log(1e-300), hi = std::log(std::exp(-1.0));
  for (int i = 0; i < n; ++i) {
    const double x = -std::exp(lo + (hi - lo) * i / (n - 1));
    const double r = lambert_w_minus1(x);
    branch_ok = branch_ok && r <= -1.0;
    worst = std::max(worst, std::abs(r * std::exp(r) - x) / std::abs(x));
  }
  return {branch_ok && worst <= 1e-12,
          fmt("max |r e^r - x| / |x| = %.2e over 1000 arguments in [-1/e, -1e-300]", worst)};
}

Outcome criterion10() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> dim(2, 6);
  std::normal_distribution<double> normal;
  double worst_proj = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int d = dim(rng);
    Surrogate s;
    s.w = testing::random_vector(d, rng);
    const Vector x0 = testing::random_vector(d, rng);
    s.b = s.w.dot(x0) + 2.0 * normal(rng);
    const RecourseResult r = l1_projection(x0, s);
    const double ref = testing::lp_projection_cost(x0, s.w, s.b);
    worst_proj = std::max(worst_proj, std::abs(r.cost - ref) / std::max(1.0, ref));
  }

  // Dyadic grids and start points keep every sum exact.
  std::uniform_int_distribution<int> features(2, 8), points(2, 4), step(-8, 8), kind(0, 4);
  int mismatches = 0, constraint_breaks = 0, infeasible = 0;
  for (int i = 0; i < 100; ++i) {
    const int d = features(rng);
    Surrogate s;
    s.w = testing::random_vector(d, rng);
    Vector x0(d);
    for (int j = 0; j < d; ++j) x0[j] = step(rng) / 8.0;
    ActionSpec spec;
    std::vector<std::vector<double>> grids;
    for (int j = 0; j < d; ++j) {
      FeatureAction fa;
      const int k = kind(rng);
      fa.kind = k == 0 ? Actionability::kImmutable
                       : (k == 1 ? Actionability::kNonDecreasing : Actionability::kFree);
      fa.grid = {0.0};
      if (fa.kind != Actionability::kImmutable) {
        const int m = points(rng);
        while (static_cast<int>(fa.grid.size()) < m) {
          double v = step(rng) / 4.0;
          if (fa.kind == Actionability::kNonDecreasing) v = std::abs(v);
          if (std::find(fa.grid.begin(), fa.grid.end(), v) == fa.grid.end()) fa.grid.push_back(v);
        }
      }
      std::sort(fa.grid.begin(), fa.grid.end());
      grids.push_back(fa.grid);
      spec.features.push_back(fa);
    }
    s.b = s.w.dot(x0) + std::abs(normal(rng)) * 1.5;
    const double ref = testing::enumeration_cost(x0, s.w, s.b, grids, actionable_tolerance(s.b));
    try {
      const RecourseResult r = actionable_recourse(x0, s, spec);
      if (r.cost != ref) ++mismatches;
      for (int j = 0; j < d; ++j) {
        const double delta = r.x_r[j] - x0[j];
        if (!std::binary_search(grids[j].begin(), grids[j].end(), delta)) ++constraint_breaks;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoActionableRecourse || std::isfinite(ref)) ++mismatches;
      ++infeasible;
    }
  }
  const bool ok = worst_proj <= 1e-9 && mismatches == 0 && constraint_breaks == 0;
  return {ok, fmt("projection max cost error %.2e (200 instances); actionable: %g mismatches, ",
                  worst_proj, mismatches) +
                  fmt("%g grid/actionability breaks, %g infeasible agreed (100 instances)",
                      constraint_breaks, infeasible)};
}

Outcome criterion11() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(2, 5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = dim(rng);
    const MlpModel m = MlpModel::initialize(d, rng());
    const Vector x = testing::random_vector(d, rng);
    const Prediction p = predict(m, x);
    const Vector fd = testing::finite_difference(
        [&m](const Vector& v) { return m.probability(v); }, x, 1e-5);
    worst = std::max(worst, (p.gradient - fd).norm() / fd.norm());
  }
  return {worst <= 1e-4, fmt("max relative gradient error %.2e over 100 probes", worst)};
}

Outcome criterion12() {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> dim(2, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int d = dim(rng);
    const Vector w = testing::random_vector(d, rng);
    const Vector mu = testing::random_vector(d, rng);
    const Matrix s = testing::random_spd(d, rng);
    const double b = w.dot(mu) + 3.0 * (unit(rng) - 0.5) * std::sqrt(w.dot(s * w)) * 2.0;
    const double nu = 2.0 * unit(rng);
    const OptimalMean om = optimal_mean(w, b, mu, s, nu);
    const double ref = testing::optimal_mean_oracle(w, b, mu, s, nu);
    worst = std::max(worst, std::abs(om.objective - ref));
  }
  return {worst <= 1e-6, fmt("max objective difference %.2e over 100 instances", worst)};
}

// Criteria 13 and 14 share one run on the seeded synthetic fixture.
struct FixtureRun {
  EvalReport report;
  double seconds = 0.0;
  std::size_t instances = 0;
  std::string error;
};

CsvTable synthetic_table(const LabeledData& d) {
  CsvTable t;
  t.header = {"x1", "x2", "label"};
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    char a[40], b[40];
    std::snprintf(a, sizeof a, "%.17g", d.features(i, 0));
    std::snprintf(b, sizeof b, "%.17g", d.features(i, 1));
    t.rows.push_back({a, b, d.labels[static_cast<std::size_t>(i)] == 1 ? "1" : "-1"});
  }
  return t;
}

FixtureRun run_fixture() {
  FixtureRun run;
  const auto t0 = Clock::now();
  try {
    constexpr std::uint64_t kSeed = 2024;
    FeatureSpec spec;
    spec.columns = {{"x1", ColumnKind::kContinuous, Actionability::kFree},
                    {"x2", ColumnKind::kContinuous, Actionability::kFree},
                    {"label", ColumnKind::kLabel, Actionability::kFree}};
    const EncodedDataset present =
        encode_dataset(synthetic_table(generate_synthetic(1000, 0.0, kSeed)), spec, 0.8, kSeed);
    const EncodedDataset shifted =
        apply_encoding(synthetic_table(generate_synthetic(1000, 1.0, kSeed + 1)), present.encoding);

    TrainConfig tc;
    tc.seed = kSeed;
    const Matrix train = present.rows(present.train);
    const MlpModel model = train_mlp(train, present.row_labels(present.train), tc);

    FutureModelConfig fc;
    fc.train.seed = derive_seed(kSeed, seed_stream::kFutureModels);
    const auto future = simulate_future_models(shifted.features, shifted.labels, fc);

    std::vector<std::size_t> ids;
    for (std::size_t i : present.test) {
      if (model.label(present.features.row(static_cast<Eigen::Index>(i)).transpose()) == -1) {
        ids.push_back(i);
      }
    }
    const Matrix instances = present.rows(ids);
    run.instances = ids.size();

    SweepConfig sc;
    sc.divergence = DivergenceKind::kFisherRao;
    sc.rho_neg_grid = {0.0, 1.0, 10.0};
    sc.sampler.n_p = 1000;
    sc.sensitivity_neighbors = 0;
    sc.seed = kSeed;
    run.report = sweep({train, model, future, instances}, sc);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds = seconds_since(t0);
  return run;
}

Outcome criterion13(const FixtureRun& run) {
  if (!run.error.empty()) return {false, "fixture run failed: " + run.error};
  const EvalRow& r0 = run.report.rows[0];
  const EvalRow& r10 = run.report.rows[2];
  const bool ok = r10.future_validity >= r0.future_validity && r10.mean_cost >= r0.mean_cost &&
                  run.seconds < 600.0;
  return {ok, fmt("future validity %.4f -> %.4f, ", r0.future_validity, r10.future_validity) +
                  fmt("mean cost %.4f -> %.4f (rho_neg 0 -> 10), ", r0.mean_cost, r10.mean_cost) +
                  fmt("%g instances, %g skipped, ", static_cast<double>(run.instances),
                      static_cast<double>(r0.n_skipped + r10.n_skipped)) +
                  fmt("%.0f s", run.seconds)};
}

Outcome criterion14(const FixtureRun& run) {
  if (!run.error.empty()) return {false, "fixture run failed: " + run.error};
  const EvalRow& r1 = run.report.rows[1];
  return {r1.local_fidelity >= 0.85,
          fmt("FR rho_neg=1 mean local fidelity %.4f (threshold 0.85)", r1.local_fidelity)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %2d  %-44s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "nominal two-class hyperplane", criterion1);
  report(2, "asymptotic quadratic/bures hyperplane", criterion2);
  report(3, "asymptotic fisher-rao/logdet hyperplane", criterion3);
  report(4, "fisher-rao rho_neg=40 near asymptote", criterion4);
  report(5, "tau closed forms vs numeric maximization", criterion5);
  report(6, "zero-radius reduction to nominal", criterion6);
  report(7, "coverage-validity trade-off monotonicity", criterion7);
  report(8, "equalization at every solve", criterion8);
  report(9, "lambert W_-1 residual", criterion9);
  report(10, "projection and actionable recourse optimality", criterion10);
  report(11, "MLP input gradient vs finite differences", criterion11);
  report(12, "optimal mean vs projected gradient", criterion12);
  const FixtureRun run = run_fixture();
  report(13, "synthetic trend: validity and cost vs radius", [&] { return criterion13(run); });
  report(14, "synthetic local fidelity", [&] { return criterion14(run); });

  std::printf("%d of 14 criteria passed\n", 14 - failures);
  return failures == 0 ? 0 : 1;
}
