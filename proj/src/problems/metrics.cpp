#include "fides/problems/metrics.hpp"

#include "fides/errors.hpp"

namespace fides::problems {

CaseMetrics compute_metrics(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& exact) {
  if (predictions.rows() != exact.rows() || predictions.cols() != exact.cols()) {
    throw ShapeError("metrics: prediction and exact shapes differ");
  }
  if (exact.size() == 0) throw ShapeError("metrics: empty evaluation set");
  const Eigen::MatrixXd err = predictions - exact;
  CaseMetrics m;
  m.mse = err.squaredNorm() / static_cast<double>(err.size());
  const double norm = exact.norm();
  m.rel_l2 = norm > 0.0 ? err.norm() / norm : err.norm();
  m.max_abs_err = err.cwiseAbs().maxCoeff();
  return m;
}

}  // namespace fides::problems
