#include "rdcov/locfit.hpp"

#include "rdcov/error.hpp"
#include "wls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace rdcov {

double kernel_weight(Kernel k, double u)
{
  const double a = std::abs(u);
  if (a > 1.0)
    return 0.0;
  switch (k.kind) {
    case KernelKind::triangular:
      return 1.0 - a;
    case KernelKind::uniform:
      return 1.0;
    case KernelKind::epanechnikov:
      return 0.75 * (1.0 - a * a);
  }
  return 0.0;
}

std::string to_string(KernelKind kind)
{
  switch (kind) {
    case KernelKind::triangular:
      return "tri";
    case KernelKind::uniform:
      return "uni";
    case KernelKind::epanechnikov:
      return "epa";
  }
  return "?";
}

KernelKind parse_kernel(const std::string& name)
{
  if (name == "tri" || name == "triangular")
    return KernelKind::triangular;
  if (name == "uni" || name == "uniform")
    return KernelKind::uniform;
  if (name == "epa" || name == "epanechnikov")
    return KernelKind::epanechnikov;
  throw ConfigError("unknown kernel '" + name + "'");
}

std::string to_string(Side side)
{
  switch (side) {
    case Side::left:
      return "left";
    case Side::right:
      return "right";
    case Side::pooled:
      return "pooled";
  }
  return "?";
}

void LocalFitSpec::check(int max_order) const
{
  if (!std::isfinite(h) || h <= 0.0) {
    std::ostringstream msg;
    msg << "bandwidth must be finite and positive (h = " << h << ")";
    throw DomainError(msg.str());
  }
  if (p < 0 || p > max_order)
    throw DomainError("polynomial order must be in [0, " + std::to_string(max_order) + "]");
}

LinearWeights fit_weights(const LocalFitSpec& spec,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          int derivative)
{
  spec.check(kMaxOrder + 2);
  if (derivative < 0 || derivative > spec.p)
    throw DomainError("derivative order must be in [0, p]");

  std::vector<Eigen::Index> rows;
  std::vector<double> kw;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!on_side(x[i], spec.side))
      continue;
    const double k = kernel_weight(spec.kernel, x[i] / spec.h);
    if (k > 0.0) {
      rows.push_back(i);
      kw.push_back(k);
    }
  }

  std::vector<double> distinct;
  distinct.reserve(rows.size());
  for (auto i : rows)
    distinct.push_back(x[i]);
  std::sort(distinct.begin(), distinct.end());
  const auto n_distinct = std::unique(distinct.begin(), distinct.end()) - distinct.begin();
  if (n_distinct < spec.p + 1) {
    std::ostringstream msg;
    msg << "insufficient data on the " << to_string(spec.side) << " side: " << n_distinct
        << " distinct scores within h = " << spec.h << " for an order-" << spec.p << " fit";
    throw InsufficientDataError(msg.str());
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(m, spec.p + 1);
  Eigen::VectorXd weights(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    design.row(r) = detail::scaled_powers(x[rows[r]], spec.h, spec.p);
    weights[r] = kw[r];
  }
  detail::WeightedLeastSquares wls(design, weights);
  if (!wls.full_rank()) {
    std::ostringstream msg;
    msg << "rank-deficient local design on the " << to_string(spec.side) << " side at h = "
        << spec.h;
    throw RankDeficientError(msg.str());
  }

  // Coefficient on u^nu, u = x/h, equals h^nu times the coefficient on x^nu.
  double factor = std::pow(spec.h, -derivative);
  for (int j = 2; j <= derivative; ++j)
    factor *= j;

  LinearWeights out;
  out.w = Eigen::VectorXd::Zero(x.size());
  const auto row = wls.projection().row(derivative);
  for (Eigen::Index r = 0; r < m; ++r)
    out.w[rows[r]] = factor * row[r];
  out.effective_n = m;
  std::ostringstream target;
  target << (derivative == 0 ? std::string("intercept")
                             : "derivative " + std::to_string(derivative))
         << ", " << to_string(spec.side) << " side, p=" << spec.p;
  out.target = target.str();
  return out;
}

JointFit joint_fit(const LocalFitSpec& spec,
                   const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   const Eigen::Ref<const Eigen::MatrixXd>& extra_cols)
{
  spec.check();
  if (y.size() != x.size() || (extra_cols.cols() > 0 && extra_cols.rows() != x.size()))
    throw DomainError("joint_fit: inconsistent input lengths");

  const int p = spec.p;
  const auto n_poly = 2 * (p + 1);
  const auto n_extra = extra_cols.cols();

  std::vector<Eigen::Index> rows;
  std::vector<double> kw;
  JointFit out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double k = kernel_weight(spec.kernel, x[i] / spec.h);
    if (k > 0.0) {
      rows.push_back(i);
      kw.push_back(k);
      (x[i] >= 0.0 ? out.effective_right : out.effective_left) += 1;
    }
  }
  if (out.effective_left == 0 || out.effective_right == 0) {
    std::ostringstream msg;
    msg << "no observations with positive weight on the "
        << (out.effective_left == 0 ? "left" : "right") << " side at h = " << spec.h;
    throw InsufficientDataError(msg.str());
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(m, n_poly + n_extra);
  Eigen::VectorXd weights(m);
  Eigen::VectorXd yy(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto i = rows[r];
    const double t = x[i] >= 0.0 ? 1.0 : 0.0;
    const auto pw = detail::scaled_powers(x[i], spec.h, p);
    for (int j = 0; j <= p; ++j) {
      design(r, 2 * j) = pw[j];
      design(r, 2 * j + 1) = t * pw[j];
    }
    if (n_extra > 0)
      design.row(r).tail(n_extra) = extra_cols.row(i);
    weights[r] = kw[r];
    yy[r] = y[i];
  }

  detail::WeightedLeastSquares poly(design.leftCols(n_poly), weights);
  if (!poly.full_rank()) {
    std::ostringstream msg;
    msg << "polynomial block rank deficient at h = " << spec.h
        << " (too few distinct scores on a side for p = " << p << ")";
    throw RankDeficientError(msg.str());
  }
  if (n_extra == 0) {
    out.coef = poly.solve(yy);
  } else {
    detail::WeightedLeastSquares full(design, weights);
    if (!full.full_rank())
      throw RankDeficientError("covariate block collinear under kernel weights at h = " +
                               std::to_string(spec.h));
    out.coef = full.solve(yy);
  }
  // Undo the x/h column scaling.
  for (int j = 1; j <= p; ++j) {
    const double s = std::pow(spec.h, -j);
    out.coef[2 * j] *= s;
    out.coef[2 * j + 1] *= s;
  }
  return out;
}

} // namespace rdcov
