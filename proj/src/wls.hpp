#pragma once

#include <Eigen/Dense>

#include <vector>

namespace rdcov::detail {

//! Relative pivot tolerance for rank decisions.
inline constexpr double kPivotTolerance = 1e-12;

//! Weighted least squares on a fixed design. Columns are equilibrated by
//! their weighted norms before a column-pivoted QR of sqrt(W) X; all public
//! results are on the original column scale.
class WeightedLeastSquares
{
public:
  //! `weights` must be positive (zero-weight rows should be left out).
  WeightedLeastSquares(const Eigen::MatrixXd& design, const Eigen::VectorXd& weights);

  Eigen::Index rank() const { return rank_; }
  Eigen::Index cols() const { return design_cols_; }
  bool full_rank() const { return rank_ == design_cols_; }
  //! True if some column has zero weighted norm.
  bool has_zero_column() const { return zero_column_; }

  //! Rows of (X'WX)^{-1} X'W, one per coefficient (cols x rows).
  const Eigen::MatrixXd& projection() const { return projection_; }
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& y) const { return projection_ * y; }
  //! Leverages w_i x_i' (X'WX)^{-1} x_i.
  const Eigen::VectorXd& leverage() const { return leverage_; }

private:
  Eigen::Index design_cols_ = 0;
  Eigen::Index rank_ = 0;
  bool zero_column_ = false;
  Eigen::MatrixXd projection_;
  Eigen::VectorXd leverage_;
};

//! Powers u^0..u^p of u = x / h.
Eigen::RowVectorXd scaled_powers(double x, double h, int p);

} // namespace rdcov::detail
