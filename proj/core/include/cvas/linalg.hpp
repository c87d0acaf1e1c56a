#pragma once

#include <Eigen/Dense>

namespace cvas {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Labels are always +1 (favorable) or -1.
using Label = int;

}  // namespace cvas
