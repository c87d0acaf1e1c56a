// Covariance divergences and surrogate JSON records.

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "cvas/error.hpp"
#include "cvas/surrogate.hpp"

namespace cvas {
namespace {

void check_pair(const Matrix& s, const Matrix& s_hat) {
  if (s.rows() != s.cols() || s_hat.rows() != s_hat.cols() ||
      s.rows() != s_hat.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariances must be square and equal size");
  }
}

// Eigenvalues of S^-1/2 S S^-1/2, i.e. of the pencil (S, S_hat).
Vector relative_eigenvalues(const Matrix& s, const Matrix& s_hat) {
  Eigen::LLT<Matrix> llt(s_hat);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "reference covariance is not PD");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(
      0.5 * (s + s.transpose()), 0.5 * (s_hat + s_hat.transpose()),
      Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "generalized eigensolve failed");
  }
  const Vector lambda = solver.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw Error(ErrorCode::kSingularCovariance, "covariance is not PD");
  }
  return lambda;
}

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_or_inf(const nlohmann::json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

double quadratic_divergence(const Matrix& s, const Matrix& s_hat) {
  check_pair(s, s_hat);
  return (s - s_hat).squaredNorm();
}

double bures_divergence(const Matrix& s, const Matrix& s_hat) {
  check_pair(s, s_hat);
  const Matrix root = symmetric_sqrt(s_hat);
  Matrix inner = root * s * root;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inner, Eigen::EigenvaluesOnly);
  const double cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::max(0.0, s.trace() + s_hat.trace() - 2.0 * cross);
}

double fisher_rao_distance(const Matrix& s, const Matrix& s_hat) {
  check_pair(s, s_hat);
  return relative_eigenvalues(s, s_hat).array().log().matrix().norm();
}

double logdet_divergence(const Matrix& s, const Matrix& s_hat) {
  check_pair(s, s_hat);
  const Vector lambda = relative_eigenvalues(s, s_hat);
  return std::max(0.0, (lambda.array() - lambda.array().log() - 1.0).sum());
}

double divergence_value(DivergenceKind kind, const Matrix& s,
                        const Matrix& s_hat) {
  switch (kind) {
    case DivergenceKind::kNominal:
      check_pair(s, s_hat);
      return (s - s_hat).isZero(0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    case DivergenceKind::kQuadratic: return quadratic_divergence(s, s_hat);
    case DivergenceKind::kBures: return std::sqrt(bures_divergence(s, s_hat));
    case DivergenceKind::kFisherRao: return fisher_rao_distance(s, s_hat);
    case DivergenceKind::kLogDet: return logdet_divergence(s, s_hat);
  }
  return 0.0;
}

std::string surrogate_to_json(const Surrogate& surrogate) {
  nlohmann::json j;
  j["w"] = std::vector<double>(surrogate.w.data(),
                               surrogate.w.data() + surrogate.w.size());
  j["b"] = surrogate.b;
  j["kappa"] = finite_or_null(surrogate.kappa);
  j["divergence"] = std::string(divergence_name(surrogate.divergence.kind));
  j["rho_pos"] = finite_or_null(surrogate.divergence.rho_pos);
  j["rho_neg"] = finite_or_null(surrogate.divergence.rho_neg);
  j["objective"] = finite_or_null(surrogate.objective);
  return j.dump();
}

Surrogate surrogate_from_json(std::string_view text) {
  Surrogate out;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto w = j.at("w").get<std::vector<double>>();
    out.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
    out.b = j.at("b").get<double>();
    out.kappa = number_or_inf(j.at("kappa"));
    out.divergence.kind = parse_divergence(j.at("divergence").get<std::string>());
    out.divergence.rho_pos = number_or_inf(j.at("rho_pos"));
    out.divergence.rho_neg = number_or_inf(j.at("rho_neg"));
    if (j.contains("objective")) out.objective = number_or_inf(j.at("objective"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("surrogate JSON: ") + e.what());
  }
  if (out.w.size() == 0) throw Error(ErrorCode::kFormatError, "surrogate JSON: empty w");
  return out;
}

}  // namespace cvas
