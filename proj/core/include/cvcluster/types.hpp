#pragma once

#include <Eigen/Dense>

namespace cvc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

}  // namespace cvc
