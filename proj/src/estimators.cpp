#include "rdcov/estimators.hpp"

#include "rdcov/error.hpp"

#include <cmath>

namespace rdcov {

std::string to_string(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::standard:
      return "standard";
    case EstimatorKind::covadj:
      return "covadj";
    case EstimatorKind::interacted:
      return "interacted";
    case EstimatorKind::demeaned_common:
      return "demeaned_common";
    case EstimatorKind::demeaned_common_interacted:
      return "demeaned_common_interacted";
    case EstimatorKind::demeaned_group_interacted:
      return "demeaned_group_interacted";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(const std::string& name)
{
  for (auto k : kAllEstimatorKinds)
    if (to_string(k) == name)
      return k;
  throw ConfigError("unknown estimator '" + name + "'");
}

bool is_diagnostic_kind(EstimatorKind kind)
{
  return kind == EstimatorKind::demeaned_common ||
         kind == EstimatorKind::demeaned_common_interacted ||
         kind == EstimatorKind::demeaned_group_interacted;
}

namespace {

struct WindowMeans
{
  Eigen::RowVectorXd all, left, right;
};

WindowMeans window_means(const Dataset& data, double h)
{
  const auto d = data.d();
  WindowMeans m{Eigen::RowVectorXd::Zero(d), Eigen::RowVectorXd::Zero(d),
                Eigen::RowVectorXd::Zero(d)};
  Eigen::Index nl = 0, nr = 0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (std::abs(data.x()[i]) > h)
      continue;
    if (data.treated(i)) {
      m.right += data.z().row(i);
      ++nr;
    } else {
      m.left += data.z().row(i);
      ++nl;
    }
  }
  if (nl + nr > 0)
    m.all = (m.left + m.right) / static_cast<double>(nl + nr);
  if (nl > 0)
    m.left /= static_cast<double>(nl);
  if (nr > 0)
    m.right /= static_cast<double>(nr);
  return m;
}

} // namespace

Eigen::MatrixXd covariate_block(const Dataset& data, EstimatorKind kind, const LocalFitSpec& spec)
{
  const auto n = data.n();
  const auto d = data.d();
  const auto& z = data.z();
  if (d == 0 || kind == EstimatorKind::standard)
    return Eigen::MatrixXd(n, 0);

  auto split = [&](const Eigen::MatrixXd& left_src, const Eigen::MatrixXd& right_src) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 2 * d);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (data.treated(i))
        out.row(i).tail(d) = right_src.row(i);
      else
        out.row(i).head(d) = left_src.row(i);
    }
    return out;
  };

  switch (kind) {
    case EstimatorKind::covadj:
      return z;
    case EstimatorKind::interacted:
      return split(z, z);
    case EstimatorKind::demeaned_common: {
      const auto m = window_means(data, spec.h);
      return z.rowwise() - m.all;
    }
    case EstimatorKind::demeaned_common_interacted: {
      const auto m = window_means(data, spec.h);
      Eigen::MatrixXd c = z.rowwise() - m.all;
      return split(c, c);
    }
    case EstimatorKind::demeaned_group_interacted: {
      const auto m = window_means(data, spec.h);
      Eigen::MatrixXd cl = z.rowwise() - m.left;
      Eigen::MatrixXd cr = z.rowwise() - m.right;
      return split(cl, cr);
    }
    case EstimatorKind::standard:
      break;
  }
  return Eigen::MatrixXd(n, 0);
}

Eigen::VectorXd covariate_rd_effects(const Dataset& data, const LocalFitSpec& spec)
{
  data.require_two_sided();
  const auto d = data.d();
  Eigen::VectorXd out(d);
  const Eigen::MatrixXd none(data.n(), 0);
  for (Eigen::Index k = 0; k < d; ++k)
    out[k] = joint_fit(spec, data.x(), data.z().col(k), none).jump();
  return out;
}

PointEstimate estimate(const Dataset& data, EstimatorKind kind, const LocalFitSpec& spec)
{
  spec.check();
  data.require_two_sided();

  PointEstimate out;
  out.kind = kind;
  out.spec = spec;
  out.spec.side = Side::pooled;
  if (data.d() == 0 && kind != EstimatorKind::standard) {
    out.notice = to_string(kind) + " requested without covariates; using standard";
    kind = EstimatorKind::standard;
  }

  const Eigen::MatrixXd block = covariate_block(data, kind, out.spec);
  const auto fit = joint_fit(out.spec, data.x(), data.y(), block);
  out.coef = fit.coef;
  out.tau = fit.jump();
  out.effective_left = fit.effective_left;
  out.effective_right = fit.effective_right;
  out.gamma = fit.extra(block.cols());
  out.tau_z = covariate_rd_effects(data, out.spec);

  if (kind == EstimatorKind::standard) {
    out.s_hat = Eigen::VectorXd::Ones(1);
  } else if (kind == EstimatorKind::covadj || kind == EstimatorKind::demeaned_common) {
    out.s_hat.resize(1 + data.d());
    out.s_hat[0] = 1.0;
    out.s_hat.tail(data.d()) = -out.gamma;
  }
  return out;
}

} // namespace rdcov
