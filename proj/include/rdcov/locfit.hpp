#pragma once

#include <Eigen/Dense>

#include <string>

namespace rdcov {

enum class KernelKind
{
  triangular,
  uniform,
  epanechnikov
};

//! Symmetric kernel K(u) = k(|u|) with k supported on [0, 1].
struct Kernel
{
  KernelKind kind = KernelKind::triangular;
};

//! K(u). |u| = 1 receives k(1): zero for triangular and Epanechnikov, one
//! for uniform. Zero for |u| > 1.
double kernel_weight(Kernel k, double u);

//! Short name ("tri", "uni", "epa") and its inverse.
std::string to_string(KernelKind kind);
KernelKind parse_kernel(const std::string& name);

enum class Side
{
  left,
  right,
  pooled
};

std::string to_string(Side side);

//! Highest supported polynomial order.
inline constexpr int kMaxOrder = 4;

struct LocalFitSpec
{
  Kernel kernel;
  int p = 1;
  double h = 1.0;
  Side side = Side::pooled;

  //! Throws DomainError if h is not finite and positive or p is outside
  //! [0, max_order]. Internal pilot fits go up to kMaxOrder + 2.
  void check(int max_order = kMaxOrder) const;
};

//! An estimate written as w'Y for any outcome vector Y on the same scores.
struct LinearWeights
{
  Eigen::VectorXd w;
  std::string target;
  Eigen::Index effective_n = 0;

  double apply(const Eigen::Ref<const Eigen::VectorXd>& y) const { return w.dot(y); }
};

//! True when x_i belongs to the side (x = 0 is on the right).
inline bool on_side(double x, Side side)
{
  return side == Side::pooled || (side == Side::right ? x >= 0.0 : x < 0.0);
}

//! Weights of the `derivative`-th derivative at zero of the order-p local
//! polynomial fit on one side: derivative! * e_derivative' (X'WX)^{-1} X'W,
//! zero outside the bandwidth or the side.
//!
//! Throws InsufficientDataError when fewer than p + 1 distinct scores carry
//! positive kernel weight, RankDeficientError if the weighted design is
//! still singular, DomainError for bad h/p/derivative.
LinearWeights fit_weights(const LocalFitSpec& spec,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          int derivative = 0);

//! Result of the pooled regression of y on
//! [1, T, x, Tx, ..., x^p, Tx^p, extra_cols] with weights K(x/h).
struct JointFit
{
  //! Coefficients on the raw (unscaled) columns in the order above.
  Eigen::VectorXd coef;
  Eigen::Index effective_left = 0;
  Eigen::Index effective_right = 0;

  double intercept() const { return coef[0]; }
  double jump() const { return coef[1]; }
  //! Coefficients of the extra columns.
  Eigen::VectorXd extra(Eigen::Index m) const { return coef.tail(m); }
};

//! Throws RankDeficientError naming the offending block ("polynomial block"
//! or "covariate block collinear") when the weighted design is singular.
JointFit joint_fit(const LocalFitSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::MatrixXd>& extra_cols);

//! Index of the coefficient on T in a JointFit.
inline constexpr Eigen::Index kJumpIndex = 1;

} // namespace rdcov
