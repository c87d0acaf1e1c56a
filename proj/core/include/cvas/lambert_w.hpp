#pragma once

namespace cvas {

// Lower real branch W_{-1} of the Lambert W function on [-1/e, 0).
// Returns r <= -1 with r * exp(r) = x. Throws DomainError outside the range.
double lambert_w_minus1(double x);

// c(rho) = -W_{-1}(-exp(-rho - 1)), the squared LogDet inflation factor.
// Evaluated as the root c >= 1 of c - log(c) = rho + 1, so it stays finite
// for radii where exp(-rho - 1) underflows.
double logdet_inflation(double rho);

}  // namespace cvas
