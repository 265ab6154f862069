#pragma once

#include <Eigen/Dense>

namespace alphadisc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace alphadisc
