#pragma once

#include <string>
#include <string_view>

#include "cvas/lambert_w.hpp"
#include "cvas/linalg.hpp"
#include "cvas/moments.hpp"

namespace cvas {

enum class DivergenceKind { kNominal, kQuadratic, kBures, kFisherRao, kLogDet };

std::string_view divergence_name(DivergenceKind kind) noexcept;

// Accepts "nominal", "quadratic", "bures", "fisher-rao", "logdet"
// (case-insensitive, '_' and '-' interchangeable).
DivergenceKind parse_divergence(std::string_view name);

// Covariance ambiguity: divergence family plus per-class radii.
struct Divergence {
  DivergenceKind kind = DivergenceKind::kNominal;
  double rho_pos = 0.0;
  double rho_neg = 0.0;

  static Divergence nominal() { return {}; }
  double radius(Label y) const { return y == 1 ? rho_pos : rho_neg; }
  void validate() const;
};

// Linear surrogate with decision rule sign(w^T x - b), normalized so that
// w^T (mu_pos - mu_neg) = 1.
struct Surrogate {
  Vector w;
  double b = 0.0;
  double kappa = 0.0;
  Divergence divergence;
  double objective = 0.0;  // sum_y tau_y(w) at the optimum

  Label classify(const Vector& x) const { return w.dot(x) - b >= 0.0 ? 1 : -1; }
};

// Worst-case standard deviation sqrt(w^T S w) over the divergence ball of
// radius rho around `covariance`, in closed form.
double tau(DivergenceKind kind, double rho, const Matrix& covariance,
           const Vector& w);

// Multiplicative weight c such that tau = c * sqrt(w^T S w) for the
// reweighting families (Nominal, FisherRao, LogDet).
double reweighting_factor(DivergenceKind kind, double rho);

struct SolverOptions {
  int max_iterations = 20000;
  double gradient_tol = 1e-9;  // on ||grad|| / (1 + |F|)
};

struct SolverReport {
  int iterations = 0;
  double gradient_norm = 0.0;
};

Surrogate solve_cvas(const ClassMoments& pos, const ClassMoments& neg,
                     const Divergence& divergence,
                     const SolverOptions& options = {},
                     SolverReport* report = nullptr);

struct CoverageValidity {
  double coverage;
  double validity;
};

// Mahalanobis distances of mu_pos to the negatively predicted halfspace and
// of mu_neg to the positively predicted halfspace, under the nominal
// covariances.
CoverageValidity coverage_validity(const Surrogate& surrogate,
                                   const ClassMoments& pos,
                                   const ClassMoments& neg);

// Worst-case probability that a class-`cls` distribution with the given
// moments falls on the wrong side: (1 + nu^2)^-1 over all distributions,
// or 1 - Phi(nu) over Gaussians, nu the distance to the misclassifying
// halfspace.
double worst_case_misclassification(const Surrogate& surrogate, Label cls,
                                    const Vector& mean,
                                    const Matrix& covariance, bool gaussian);

enum class AsymptoticFamily { kQuadraticOrBures, kFisherRaoOrLogDet };

// Limit of the robust surrogate as the radius of `inflated_class` grows
// without bound. The hyperplane passes through the opposite class mean.
Surrogate asymptotic_surrogate(const ClassMoments& pos, const ClassMoments& neg,
                               AsymptoticFamily family, Label inflated_class);

// Maximizer of w^T S w over the Fisher-Rao ball of radius rho around S:
// S^1/2 (I + (e^rho - 1) v v^T / |v|^2) S^1/2 with v = S^1/2 w.
Matrix fr_worst_case_covariance(const Matrix& covariance, double rho,
                                const Vector& w);

struct OptimalMean {
  Vector mean;
  double objective;
};

// argmin of (b - w^T mu)^2 over the ellipsoid
// (mu - mean_hat)^T S^-1 (mu - mean_hat) <= nu^2.
OptimalMean optimal_mean(const Vector& w, double b, const Vector& mean_hat,
                         const Matrix& covariance, double nu);

// Divergence values between covariance matrices, used to verify worst-case
// matrices and by numeric oracles.
double quadratic_divergence(const Matrix& s, const Matrix& s_hat);
double bures_divergence(const Matrix& s, const Matrix& s_hat);
double fisher_rao_distance(const Matrix& s, const Matrix& s_hat);
double logdet_divergence(const Matrix& s, const Matrix& s_hat);

// The quantity the ambiguity ball bounds by rho: Q, sqrt(B), F or D. The
// Bures ball is a Wasserstein-distance ball, which is what makes
// tau = rho |w| + sqrt(w^T S w) exact.
double divergence_value(DivergenceKind kind, const Matrix& s,
                        const Matrix& s_hat);

// {"w": [...], "b": .., "kappa": .., "divergence": "fisher-rao",
//  "rho_pos": .., "rho_neg": ..}
std::string surrogate_to_json(const Surrogate& surrogate);
Surrogate surrogate_from_json(std::string_view json);

}  // namespace cvas
