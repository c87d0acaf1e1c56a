#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cvas/blackbox.hpp"
#include "cvas/recourse.hpp"
#include "cvas/sampler.hpp"
#include "cvas/surrogate.hpp"

namespace cvas {

using LabelFn = std::function<Label(const Vector&)>;

// Fraction of n uniform samples from the L2 ball of radius r_fid around x0
// on which the model label equals the surrogate label.
double local_fidelity(const LabelFn& model, const Surrogate& surrogate,
                      const Vector& x0, double r_fid, std::size_t n = 1000,
                      std::uint64_t seed = 0);
double local_fidelity(const MlpModel& model, const Surrogate& surrogate,
                      const Vector& x0, double r_fid, std::size_t n = 1000,
                      std::uint64_t seed = 0);

struct PipelineConfig {
  SamplerConfig sampler;
  Divergence divergence;
};

struct SensitivityResult {
  double value = 0.0;  // max |w(x0) - w(x')|_2 over successful neighbors
  std::size_t n_failed = 0;
};

// Reruns the surrogate pipeline at n_neighbors draws from N(x0, noise_var I)
// with the sampler seed held fixed. Neighbors whose pipeline fails are
// skipped; throws the last failure if none succeeds.
SensitivityResult sensitivity(const PipelineConfig& config, const MlpModel& model,
                              const Matrix& dataset, const Vector& x0,
                              std::size_t n_neighbors = 10,
                              double noise_var = 1e-3, std::uint64_t seed = 0);

struct ValidityMetrics {
  double current = 0.0;
  double future = 0.0;
  double mean_cost = 0.0;
};

// Current validity is the fraction of x_r labeled +1 by `current`; future
// validity the mean over `future` of the same fraction.
ValidityMetrics validity_metrics(std::span<const RecourseResult> recourses,
                                 const MlpModel& current,
                                 std::span<const MlpModel> future);

struct ParetoPoint {
  double cost;
  double validity;
};

// Indices of the non-dominated points (lower cost, higher validity), in
// ascending cost order; of exact duplicates only the first is kept.
std::vector<std::size_t> pareto_indices(std::span<const ParetoPoint> points);
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

struct EvalRow {
  std::string config_id;
  DivergenceKind divergence = DivergenceKind::kNominal;
  double rho_pos = 0.0;
  double rho_neg = 0.0;
  RecourseMode mode = RecourseMode::kProjection;
  double mean_cost = 0.0;
  double current_validity = 0.0;
  double future_validity = 0.0;
  double local_fidelity = 0.0;
  double sensitivity = 0.0;
  std::size_t n_skipped = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
};

inline constexpr const char* kEvalCsvHeader =
    "config_id,divergence,rho_pos,rho_neg,mode,mean_cost,current_validity,"
    "future_validity,local_fidelity,sensitivity,n_skipped";

struct SweepInputs {
  const Matrix& dataset;            // present-data features (prototypes)
  const MlpModel& current;          // model trained on the present data
  std::span<const MlpModel> future; // ensemble trained on the shifted data
  const Matrix& instances;          // one recourse query per row
};

struct SweepConfig {
  DivergenceKind divergence = DivergenceKind::kNominal;
  double rho_pos = 0.0;
  std::vector<double> rho_neg_grid = {0.0};
  RecourseMode mode = RecourseMode::kProjection;
  // Used by actionable mode to build default grids from `dataset`.
  std::vector<Actionability> actionability;
  SamplerConfig sampler;      // r_p resolved from the dataset when unset
  std::optional<double> r_fid;  // default 10% of the max pairwise distance
  std::size_t fidelity_samples = 1000;
  std::size_t sensitivity_neighbors = 10;  // 0 skips the sensitivity column
  double sensitivity_noise_var = 1e-3;
  std::uint64_t seed = 0;
};

// One row per rho_neg. Each (instance, rho) cell runs the full pipeline;
// the sampler seed of an instance is shared across rho values. Failing
// cells are counted in n_skipped and excluded from the averages.
EvalReport sweep(const SweepInputs& inputs, const SweepConfig& config);

// "start:stop:step", inclusive of stop when step divides the span.
std::vector<double> parse_range(std::string_view text);

}  // namespace cvas
