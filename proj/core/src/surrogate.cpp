#include "cvas/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "cvas/error.hpp"

namespace cvas {
namespace {

constexpr double kMaxFisherRaoRadius = 700.0;

void check_radius(DivergenceKind kind, double rho) {
  if (std::isnan(rho)) throw Error(ErrorCode::kNegativeRadius, "radius is NaN");
  if (rho < 0.0) throw Error(ErrorCode::kNegativeRadius, "radius must be >= 0");
  if (!std::isfinite(rho)) {
    throw Error(ErrorCode::kRadiusOutOfRange,
                "infinite radius; use asymptotic_surrogate");
  }
  if (kind == DivergenceKind::kFisherRao && rho > kMaxFisherRaoRadius) {
    throw Error(ErrorCode::kRadiusOutOfRange,
                "Fisher-Rao radius above 700 overflows; use asymptotic_surrogate");
  }
}

void check_square(const Matrix& s, Eigen::Index d, const char* what) {
  if (s.rows() != d || s.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " has the wrong shape");
  }
}

// One class term of the reduced objective: c * sqrt(w^T S w).
struct ClassTerm {
  Matrix s;
  double weight;
};

// F(w) = sum_y c_y sqrt(w^T S_y w) + beta |w|_2, with derivatives.
class RobustObjective {
 public:
  RobustObjective(std::array<ClassTerm, 2> terms, double beta)
      : terms_(std::move(terms)), beta_(beta) {}

  double value(const Vector& w) const {
    double f = beta_ > 0.0 ? beta_ * w.norm() : 0.0;
    for (const auto& t : terms_) f += t.weight * std::sqrt(w.dot(t.s * w));
    return f;
  }

  void derivatives(const Vector& w, Vector& grad, Matrix& hess) const {
    const auto d = w.size();
    grad = Vector::Zero(d);
    hess = Matrix::Zero(d, d);
    for (const auto& t : terms_) {
      const Vector sw = t.s * w;
      const double q = std::sqrt(w.dot(sw));
      grad += (t.weight / q) * sw;
      hess += (t.weight / q) * t.s - (t.weight / (q * q * q)) * sw * sw.transpose();
    }
    if (beta_ > 0.0) {
      const double n = w.norm();
      grad += (beta_ / n) * w;
      hess += (beta_ / n) * Matrix::Identity(d, d) -
              (beta_ / (n * n * n)) * w * w.transpose();
    }
  }

 private:
  std::array<ClassTerm, 2> terms_;
  double beta_;
};

// Orthonormal basis of the complement of a (d x (d-1)).
Matrix null_space_basis(const Vector& a) {
  const auto d = a.size();
  Eigen::HouseholderQR<Matrix> qr(a);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return q.rightCols(d - 1);
}

struct Minimizer {
  Vector w;
  int iterations;
  double gradient_norm;
};

// Damped Newton with Armijo backtracking on z -> F(w0 + N z).
Minimizer minimize_on_affine(const RobustObjective& f, const Vector& w0,
                             const Matrix& basis, const SolverOptions& opt) {
  const auto m = basis.cols();
  Vector z = Vector::Zero(m);
  Vector w = w0;
  if (m == 0) return {w, 0, 0.0};
  double fz = f.value(w);
  Vector grad_w;
  Matrix hess_w;
  for (int it = 0; it < opt.max_iterations; ++it) {
    f.derivatives(w, grad_w, hess_w);
    const Vector g = basis.transpose() * grad_w;
    const double gnorm = g.norm();
    if (gnorm <= opt.gradient_tol * (1.0 + std::abs(fz))) {
      return {w, it, gnorm};
    }
    Matrix h = basis.transpose() * hess_w * basis;
    h = 0.5 * (h + h.transpose());
    Vector dir;
    Eigen::LDLT<Matrix> ldlt(h);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      dir = -ldlt.solve(g);
    }
    if (dir.size() != m || !dir.allFinite() || g.dot(dir) >= 0.0) dir = -g;

    const double slope = g.dot(dir);
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Vector z_try = z + step * dir;
      const Vector w_try = w0 + basis * z_try;
      const double f_try = f.value(w_try);
      if (std::isfinite(f_try) && f_try < fz && f_try <= fz + 1e-4 * step * slope) {
        z = z_try;
        w = w_try;
        fz = f_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No representable decrease left: accept if the gradient is at the
      // rounding floor of F, otherwise report failure.
      if (gnorm <= 1e3 * opt.gradient_tol * (1.0 + std::abs(fz))) {
        return {w, it, gnorm};
      }
      throw Error(ErrorCode::kSolverDidNotConverge,
                  "line search stalled with reduced gradient " +
                      std::to_string(gnorm));
    }
  }
  throw Error(ErrorCode::kSolverDidNotConverge,
              "iteration cap reached without meeting the gradient tolerance");
}

std::string normalize_name(std::string_view name) {
  std::string s;
  for (char ch : name) {
    if (ch == '_' || ch == ' ') ch = '-';
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return s;
}

}  // namespace

std::string_view divergence_name(DivergenceKind kind) noexcept {
  switch (kind) {
    case DivergenceKind::kNominal: return "nominal";
    case DivergenceKind::kQuadratic: return "quadratic";
    case DivergenceKind::kBures: return "bures";
    case DivergenceKind::kFisherRao: return "fisher-rao";
    case DivergenceKind::kLogDet: return "logdet";
  }
  return "unknown";
}

DivergenceKind parse_divergence(std::string_view name) {
  const std::string s = normalize_name(name);
  if (s == "nominal") return DivergenceKind::kNominal;
  if (s == "quadratic" || s == "quad") return DivergenceKind::kQuadratic;
  if (s == "bures" || s == "bw") return DivergenceKind::kBures;
  if (s == "fisher-rao" || s == "fr" || s == "fisherrao") return DivergenceKind::kFisherRao;
  if (s == "logdet" || s == "log-det") return DivergenceKind::kLogDet;
  throw Error(ErrorCode::kInvalidArgument, "unknown divergence '" + std::string(name) + "'");
}

void Divergence::validate() const {
  check_radius(kind, rho_pos);
  check_radius(kind, rho_neg);
  if (kind == DivergenceKind::kNominal && (rho_pos != 0.0 || rho_neg != 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "nominal divergence takes zero radii");
  }
}

double reweighting_factor(DivergenceKind kind, double rho) {
  check_radius(kind, rho);
  switch (kind) {
    case DivergenceKind::kNominal: return 1.0;
    case DivergenceKind::kFisherRao: return std::exp(0.5 * rho);
    case DivergenceKind::kLogDet: return std::sqrt(logdet_inflation(rho));
    default:
      throw Error(ErrorCode::kInvalidArgument,
                  "divergence is not a pure reweighting");
  }
}

double tau(DivergenceKind kind, double rho, const Matrix& covariance,
           const Vector& w) {
  check_square(covariance, w.size(), "covariance");
  if (w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  check_radius(kind, rho);
  const double spread = std::sqrt(std::max(0.0, w.dot(covariance * w)));
  if (rho == 0.0) return spread;
  switch (kind) {
    case DivergenceKind::kNominal:
      return spread;
    case DivergenceKind::kQuadratic:
      return std::sqrt(std::max(0.0, w.dot(covariance * w)) +
                       std::sqrt(rho) * w.squaredNorm());
    case DivergenceKind::kBures:
      return rho * w.norm() + spread;
    case DivergenceKind::kFisherRao:
    case DivergenceKind::kLogDet:
      return reweighting_factor(kind, rho) * spread;
  }
  return spread;
}

Surrogate solve_cvas(const ClassMoments& pos, const ClassMoments& neg,
                     const Divergence& divergence, const SolverOptions& options,
                     SolverReport* report) {
  divergence.validate();
  const auto d = pos.mean.size();
  if (d == 0 || neg.mean.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "class means differ in dimension");
  }
  check_square(pos.covariance, d, "positive covariance");
  check_square(neg.covariance, d, "negative covariance");
  const Vector a = pos.mean - neg.mean;
  const double scale = 1.0 + std::max(pos.mean.norm(), neg.mean.norm());
  if (!(a.norm() > 1e-14 * scale)) {
    throw Error(ErrorCode::kIdenticalMeans, "class means coincide");
  }

  const Matrix s_pos = ridge(pos.covariance);
  const Matrix s_neg = ridge(neg.covariance);
  auto term = [&](const Matrix& s, double rho) -> ClassTerm {
    switch (divergence.kind) {
      case DivergenceKind::kQuadratic:
        return {s + std::sqrt(rho) * Matrix::Identity(d, d), 1.0};
      case DivergenceKind::kBures:
        return {s, 1.0};
      default:
        return {s, reweighting_factor(divergence.kind, rho)};
    }
  };
  const double beta = divergence.kind == DivergenceKind::kBures
                          ? divergence.rho_pos + divergence.rho_neg
                          : 0.0;
  const RobustObjective objective(
      {term(s_pos, divergence.rho_pos), term(s_neg, divergence.rho_neg)}, beta);

  const Vector w0 = a / a.squaredNorm();
  const Minimizer sol =
      minimize_on_affine(objective, w0, null_space_basis(a), options);
  if (report) *report = {sol.iterations, sol.gradient_norm};

  Surrogate out;
  out.w = sol.w;
  out.divergence = divergence;
  const double tau_pos = tau(divergence.kind, divergence.rho_pos, s_pos, out.w);
  const double tau_neg = tau(divergence.kind, divergence.rho_neg, s_neg, out.w);
  out.objective = tau_pos + tau_neg;
  out.kappa = 1.0 / out.objective;
  out.b = out.w.dot(pos.mean) - out.kappa * tau_pos;
  return out;
}

CoverageValidity coverage_validity(const Surrogate& surrogate,
                                   const ClassMoments& pos,
                                   const ClassMoments& neg) {
  return {halfspace_distance(pos.mean, pos.covariance, -surrogate.w, -surrogate.b),
          halfspace_distance(neg.mean, neg.covariance, surrogate.w, surrogate.b)};
}

double worst_case_misclassification(const Surrogate& surrogate, Label cls,
                                    const Vector& mean,
                                    const Matrix& covariance, bool gaussian) {
  if (cls != 1 && cls != -1) {
    throw Error(ErrorCode::kInvalidArgument, "class must be +1 or -1");
  }
  // The misclassifying halfspace of class +1 is {w^T x - b <= 0}.
  const double nu =
      cls == 1 ? halfspace_distance(mean, covariance, -surrogate.w, -surrogate.b)
               : halfspace_distance(mean, covariance, surrogate.w, surrogate.b);
  if (gaussian) return 0.5 * std::erfc(nu / std::sqrt(2.0));
  return 1.0 / (1.0 + nu * nu);
}

Surrogate asymptotic_surrogate(const ClassMoments& pos, const ClassMoments& neg,
                               AsymptoticFamily family, Label inflated_class) {
  if (inflated_class != 1 && inflated_class != -1) {
    throw Error(ErrorCode::kInvalidArgument, "inflated class must be +1 or -1");
  }
  const auto d = pos.mean.size();
  if (neg.mean.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "class means differ in dimension");
  }
  const Vector a = pos.mean - neg.mean;
  const double scale = 1.0 + std::max(pos.mean.norm(), neg.mean.norm());
  if (!(a.norm() > 1e-14 * scale)) {
    throw Error(ErrorCode::kIdenticalMeans, "class means coincide");
  }
  const ClassMoments& inflated = inflated_class == 1 ? pos : neg;
  check_square(inflated.covariance, d, "covariance");

  Surrogate out;
  const double inf = std::numeric_limits<double>::infinity();
  if (family == AsymptoticFamily::kQuadraticOrBures) {
    out.w = a / a.squaredNorm();
    out.divergence.kind = DivergenceKind::kQuadratic;
  } else {
    const Matrix s = ridge(inflated.covariance);
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularCovariance,
                  "inflated-class covariance is not positive definite");
    }
    const Vector u = llt.solve(a);
    out.w = u / a.dot(u);
    out.divergence.kind = DivergenceKind::kFisherRao;
  }
  (inflated_class == 1 ? out.divergence.rho_pos : out.divergence.rho_neg) = inf;
  out.b = out.w.dot(inflated.mean) - static_cast<double>(inflated_class);
  // Nominal margin of the inflated class: |w^T mu_y - b| = kappa sqrt(w^T S w).
  out.objective = std::sqrt(out.w.dot(inflated.covariance * out.w));
  out.kappa = 1.0 / out.objective;
  return out;
}

Matrix fr_worst_case_covariance(const Matrix& covariance, double rho,
                                const Vector& w) {
  check_square(covariance, w.size(), "covariance");
  check_radius(DivergenceKind::kFisherRao, rho);
  if (w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularCovariance, "covariance is not positive definite");
  }
  const Matrix root = symmetric_sqrt(covariance);
  const Vector v = root * w;
  const auto d = w.size();
  const Matrix core = Matrix::Identity(d, d) +
                      (std::expm1(rho) / v.squaredNorm()) * v * v.transpose();
  const Matrix out = root * core * root;
  return 0.5 * (out + out.transpose());
}

OptimalMean optimal_mean(const Vector& w, double b, const Vector& mean_hat,
                         const Matrix& covariance, double nu) {
  check_square(covariance, w.size(), "covariance");
  if (mean_hat.size() != w.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "mean dimension");
  }
  if (w.isZero(0.0)) throw Error(ErrorCode::kZeroSlope, "w must be nonzero");
  if (!(nu >= 0.0)) throw Error(ErrorCode::kNegativeRadius, "nu must be >= 0");
  const Vector sw = covariance * w;
  const double var = w.dot(sw);
  if (!(var > 0.0)) {
    throw Error(ErrorCode::kSingularCovariance, "w^T S w must be positive");
  }
  const double spread = std::sqrt(var);
  const double gap = b - w.dot(mean_hat);
  if (std::abs(gap) <= nu * spread) {
    return {mean_hat + (gap / var) * sw, 0.0};
  }
  const double sign = gap > 0.0 ? 1.0 : -1.0;
  const double excess = std::abs(gap) - nu * spread;
  return {mean_hat + (sign * nu / spread) * sw, excess * excess};
}

}  // namespace cvas
