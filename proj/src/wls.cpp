#include "wls.hpp"

#include <cmath>

namespace rdcov::detail {

WeightedLeastSquares::WeightedLeastSquares(const Eigen::MatrixXd& design,
                                           const Eigen::VectorXd& weights)
  : design_cols_(design.cols())
{
  const auto m = design.rows();
  const auto k = design.cols();
  const Eigen::VectorXd sw = weights.array().sqrt();
  Eigen::MatrixXd a = sw.asDiagonal() * design;

  Eigen::VectorXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double norm = a.col(j).norm();
    if (!(norm > 0.0)) {
      zero_column_ = true;
      scale[j] = 1.0;
    } else {
      scale[j] = 1.0 / norm;
    }
  }
  if (zero_column_ || m < k) {
    rank_ = zero_column_ ? 0 : std::min(m, k);
    return;
  }
  a = a * scale.asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(kPivotTolerance);
  rank_ = qr.rank();
  if (rank_ < k)
    return;

  // a P = Q R  =>  (a'a)^{-1} a' = P R^{-1} Q'.
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  const auto r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd rinv_qt = r.solve(q.transpose());
  Eigen::MatrixXd pinv = qr.colsPermutation() * rinv_qt;
  projection_ = scale.asDiagonal() * pinv * sw.asDiagonal();
  leverage_ = q.rowwise().squaredNorm();
}

Eigen::RowVectorXd scaled_powers(double x, double h, int p)
{
  Eigen::RowVectorXd r(p + 1);
  const double u = x / h;
  double v = 1.0;
  for (int j = 0; j <= p; ++j) {
    r[j] = v;
    v *= u;
  }
  return r;
}

} // namespace rdcov::detail
