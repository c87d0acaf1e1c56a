#include "cvas/evalharness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "cvas/error.hpp"
#include "cvas/io_util.hpp"
#include "cvas/random.hpp"

namespace cvas {
namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Cell {
  double cost;
  bool current_valid;
  double future_fraction;
  double fidelity;
  double sensitivity;
};

double future_fraction(const Vector& x, std::span<const MlpModel> future) {
  if (future.empty()) return 0.0;
  std::size_t valid = 0;
  for (const auto& m : future) valid += m.label(x) == 1 ? 1 : 0;
  return static_cast<double>(valid) / static_cast<double>(future.size());
}

}  // namespace

double local_fidelity(const LabelFn& model, const Surrogate& surrogate,
                      const Vector& x0, double r_fid, std::size_t n,
                      std::uint64_t seed) {
  if (!(r_fid > 0.0)) throw Error(ErrorCode::kInvalidArgument, "r_fid must be > 0");
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (surrogate.w.size() != x0.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "x0 vs surrogate dimension");
  }
  Rng rng(seed);
  const Matrix pts = sample_uniform_ball(x0, r_fid, n, rng);
  std::size_t agree = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const Vector x = pts.row(i).transpose();
    agree += model(x) == surrogate.classify(x) ? 1 : 0;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

double local_fidelity(const MlpModel& model, const Surrogate& surrogate,
                      const Vector& x0, double r_fid, std::size_t n,
                      std::uint64_t seed) {
  return local_fidelity([&model](const Vector& x) { return model.label(x); },
                        surrogate, x0, r_fid, n, seed);
}

SensitivityResult sensitivity(const PipelineConfig& config, const MlpModel& model,
                              const Matrix& dataset, const Vector& x0,
                              std::size_t n_neighbors, double noise_var,
                              std::uint64_t seed) {
  if (n_neighbors == 0) throw Error(ErrorCode::kInvalidArgument, "n_neighbors must be >= 1");
  if (!(noise_var >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise_var must be >= 0");
  const Vector w0 =
      fit_local_surrogate(model, x0, dataset, config.sampler, config.divergence)
          .surrogate.w;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_var));
  SensitivityResult out;
  std::optional<Error> last_error;
  std::size_t ok = 0;
  for (std::size_t k = 0; k < n_neighbors; ++k) {
    Vector x = x0;
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] += normal(rng);
    try {
      const Vector w = fit_local_surrogate(model, x, dataset, config.sampler,
                                           config.divergence)
                           .surrogate.w;
      out.value = std::max(out.value, (w - w0).norm());
      ++ok;
    } catch (const Error& e) {
      ++out.n_failed;
      last_error = e;
    }
  }
  if (ok == 0) throw *last_error;
  return out;
}

ValidityMetrics validity_metrics(std::span<const RecourseResult> recourses,
                                 const MlpModel& current,
                                 std::span<const MlpModel> future) {
  if (recourses.empty()) throw Error(ErrorCode::kEmptyInput, "no recourses");
  if (future.empty()) throw Error(ErrorCode::kEmptyInput, "empty future ensemble");
  const double n = static_cast<double>(recourses.size());
  ValidityMetrics out;
  for (const auto& r : recourses) {
    out.current += current.label(r.x_r) == 1 ? 1.0 : 0.0;
    out.mean_cost += r.cost;
  }
  for (const auto& m : future) {
    std::size_t valid = 0;
    for (const auto& r : recourses) valid += m.label(r.x_r) == 1 ? 1 : 0;
    out.future += static_cast<double>(valid) / n;
  }
  out.current /= n;
  out.mean_cost /= n;
  out.future /= static_cast<double>(future.size());
  return out;
}

std::vector<std::size_t> pareto_indices(std::span<const ParetoPoint> points) {
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].cost != points[b].cost) return points[a].cost < points[b].cost;
    return points[a].validity > points[b].validity;
  });
  std::vector<std::size_t> out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) {
    if (points[i].validity > best) {
      out.push_back(i);
      best = points[i].validity;
    }
  }
  return out;
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
  std::vector<ParetoPoint> out;
  for (std::size_t i : pareto_indices(points)) out.push_back(points[i]);
  return out;
}

std::string EvalReport::to_csv() const {
  std::string out = std::string(kEvalCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.config_id + "," + std::string(divergence_name(r.divergence)) + "," +
           format_double(r.rho_pos) + "," + format_double(r.rho_neg) + "," +
           std::string(recourse_mode_name(r.mode)) + "," +
           format_double(r.mean_cost) + "," + format_double(r.current_validity) +
           "," + format_double(r.future_validity) + "," +
           format_double(r.local_fidelity) + "," + format_double(r.sensitivity) +
           "," + std::to_string(r.n_skipped) + "\n";
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"config_id", r.config_id},
                   {"divergence", std::string(divergence_name(r.divergence))},
                   {"rho_pos", r.rho_pos},
                   {"rho_neg", r.rho_neg},
                   {"mode", std::string(recourse_mode_name(r.mode))},
                   {"mean_cost", r.mean_cost},
                   {"current_validity", r.current_validity},
                   {"future_validity", r.future_validity},
                   {"local_fidelity", r.local_fidelity},
                   {"sensitivity", r.sensitivity},
                   {"n_skipped", r.n_skipped}});
  }
  return arr.dump(2) + "\n";
}

EvalReport sweep(const SweepInputs& inputs, const SweepConfig& config) {
  const auto n_inst = static_cast<std::size_t>(inputs.instances.rows());
  if (n_inst == 0) throw Error(ErrorCode::kEmptyInput, "no instances");
  if (config.rho_neg_grid.empty()) throw Error(ErrorCode::kEmptyInput, "empty radius grid");
  if (inputs.future.empty()) throw Error(ErrorCode::kEmptyInput, "empty future ensemble");
  if (inputs.instances.cols() != inputs.dataset.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "instances vs dataset columns");
  }
  if (config.mode == RecourseMode::kActionable &&
      static_cast<Eigen::Index>(config.actionability.size()) != inputs.dataset.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "actionability needs one entry per column");
  }
  std::vector<Divergence> divs;
  for (double rho : config.rho_neg_grid) {
    Divergence div{config.divergence, config.rho_pos, rho};
    div.validate();
    divs.push_back(div);
  }
  config.sampler.validate();

  // The O(n^2) distance is resolved once and shared by every cell.
  const double max_dist = max_pairwise_distance(inputs.dataset);
  SamplerConfig sampler = config.sampler;
  if (!sampler.r_p) sampler.r_p = 0.05 * max_dist;
  const double r_fid = config.r_fid ? *config.r_fid : 0.1 * max_dist;
  if (!(*sampler.r_p > 0.0) || !(r_fid > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dataset has zero spread");
  }

  const std::size_t n_rho = divs.size();
  std::vector<std::optional<Cell>> cells(n_inst * n_rho);
  parallel_for(cells.size(), [&](std::size_t c) {
    const std::size_t i = c / n_rho;
    const std::size_t r = c % n_rho;
    const Vector x0 = inputs.instances.row(static_cast<Eigen::Index>(i)).transpose();
    SamplerConfig sc = sampler;
    sc.seed = derive_seed(config.seed, seed_stream::kSampler, i);
    try {
      const LocalFit fit =
          fit_local_surrogate(inputs.current, x0, inputs.dataset, sc, divs[r]);
      RecourseResult rec;
      if (config.mode == RecourseMode::kProjection) {
        rec = l1_projection(x0, fit.surrogate);
      } else {
        const ActionSpec spec =
            default_action_grids(x0, inputs.dataset, config.actionability);
        rec = actionable_recourse(x0, fit.surrogate, spec);
      }
      Cell cell;
      cell.cost = rec.cost;
      cell.current_valid = inputs.current.label(rec.x_r) == 1;
      cell.future_fraction = future_fraction(rec.x_r, inputs.future);
      cell.fidelity = local_fidelity(inputs.current, fit.surrogate, x0, r_fid,
                                     config.fidelity_samples,
                                     derive_seed(config.seed, seed_stream::kFidelity, i));
      cell.sensitivity = 0.0;
      if (config.sensitivity_neighbors > 0) {
        cell.sensitivity =
            sensitivity({sc, divs[r]}, inputs.current, inputs.dataset, x0,
                        config.sensitivity_neighbors, config.sensitivity_noise_var,
                        derive_seed(config.seed, seed_stream::kSensitivity, i))
                .value;
      }
      cells[c] = cell;
    } catch (const Error&) {
      // Counted as skipped below.
    }
  });

  EvalReport report;
  for (std::size_t r = 0; r < n_rho; ++r) {
    EvalRow row;
    row.divergence = config.divergence;
    row.rho_pos = config.rho_pos;
    row.rho_neg = divs[r].rho_neg;
    row.mode = config.mode;
    row.config_id = std::string(divergence_name(row.divergence)) + "/" +
                    std::string(recourse_mode_name(row.mode)) + "/rho_pos=" +
                    format_short(row.rho_pos) + "/rho_neg=" + format_short(row.rho_neg);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n_inst; ++i) {
      const auto& cell = cells[i * n_rho + r];
      if (!cell) {
        ++row.n_skipped;
        continue;
      }
      ++ok;
      row.mean_cost += cell->cost;
      row.current_validity += cell->current_valid ? 1.0 : 0.0;
      row.future_validity += cell->future_fraction;
      row.local_fidelity += cell->fidelity;
      row.sensitivity += cell->sensitivity;
    }
    if (ok > 0) {
      const double n = static_cast<double>(ok);
      row.mean_cost /= n;
      row.current_validity /= n;
      row.future_validity /= n;
      row.local_fidelity /= n;
      row.sensitivity /= n;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<double> parse_range(std::string_view text) {
  auto bad = [&]() {
    return Error(ErrorCode::kInvalidArgument,
                 "range must be start:stop:step, got '" + std::string(text) + "'");
  };
  double parts[3];
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = k < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos) throw bad();
    const std::string token(text.substr(pos, end - pos));
    char* stop = nullptr;
    parts[k] = std::strtod(token.c_str(), &stop);
    if (token.empty() || stop != token.c_str() + token.size() || !std::isfinite(parts[k])) {
      throw bad();
    }
    pos = end + 1;
  }
  if (text.find(':', text.rfind(':') + 1) != std::string_view::npos) throw bad();
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || stop < start) throw bad();
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

}  // namespace cvas
