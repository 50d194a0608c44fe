#pragma once

#include <Eigen/Dense>

namespace scca {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace scca
