#pragma once

#include <Eigen/Dense>

namespace fides::problems {

struct CaseMetrics {
  double mse = 0.0;
  double rel_l2 = 0.0;       // ||pred - exact||_2 / ||exact||_2 over every entry
  double max_abs_err = 0.0;
};

/// Throws ShapeError when shapes differ.
CaseMetrics compute_metrics(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& exact);

}  // namespace fides::problems
