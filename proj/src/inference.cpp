#include "rdcov/inference.hpp"

#include "rdcov/error.hpp"
#include "rdcov/numeric.hpp"
#include "residuals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdcov {

std::string to_string(VarianceMethod m)
{
  switch (m) {
    case VarianceMethod::nn:
      return "nn";
    case VarianceMethod::hc0:
      return "hc0";
    case VarianceMethod::hc1:
      return "hc1";
    case VarianceMethod::hc2:
      return "hc2";
    case VarianceMethod::hc3:
      return "hc3";
    case VarianceMethod::cluster:
      return "cluster";
  }
  return "?";
}

VarianceMethod parse_variance_method(const std::string& name)
{
  for (auto m : {VarianceMethod::nn, VarianceMethod::hc0, VarianceMethod::hc1, VarianceMethod::hc2,
                 VarianceMethod::hc3, VarianceMethod::cluster})
    if (to_string(m) == name)
      return m;
  throw ConfigError("unknown variance method '" + name + "'");
}

namespace {

double factorial(int k)
{
  double f = 1.0;
  for (int j = 2; j <= k; ++j)
    f *= j;
  return f;
}

EstimatorKind inference_kind(const Dataset& data, EstimatorKind kind, std::string* notice)
{
  if (kind != EstimatorKind::standard && kind != EstimatorKind::covadj)
    throw ConfigError("robust inference is available for the standard and covadj estimators only");
  if (kind == EstimatorKind::covadj && data.d() == 0) {
    if (notice)
      *notice = "covadj requested without covariates; using standard";
    return EstimatorKind::standard;
  }
  return kind;
}

LocalFitSpec sided(LocalFitSpec spec, Side side)
{
  spec.side = side;
  return spec;
}

} // namespace

double BiasCorrection::recompute(const Dataset& data) const
{
  double v = corrected.apply(data.y());
  if (gamma.size() > 0)
    v -= (corrected.w.transpose() * data.z()).dot(gamma);
  return v;
}

BiasCorrection bias_corrected_estimate(const Dataset& data,
                                       EstimatorKind kind,
                                       const LocalFitSpec& spec,
                                       double b)
{
  spec.check();
  data.require_two_sided();
  if (!std::isfinite(b) || b <= 0.0) {
    std::ostringstream msg;
    msg << "pilot bandwidth must be finite and positive (b = " << b << ")";
    throw DomainError(msg.str());
  }

  BiasCorrection out;
  out.kind = inference_kind(data, kind, &out.notice);
  out.spec = spec;
  out.spec.side = Side::pooled;

  const auto point = estimate(data, out.kind, out.spec);
  out.tau = point.tau;
  out.effective_left = point.effective_left;
  out.effective_right = point.effective_right;
  out.gamma = out.kind == EstimatorKind::covadj ? point.gamma : Eigen::VectorXd();
  out.s_hat = Eigen::VectorXd::Ones(1 + data.d());
  if (out.gamma.size() > 0)
    out.s_hat.tail(data.d()) = -out.gamma;
  else if (data.d() > 0)
    out.s_hat.tail(data.d()).setZero();

  Eigen::VectorXd lin = data.y();
  if (out.gamma.size() > 0)
    lin -= data.z() * out.gamma;

  const int p = spec.p;
  const int q = p + 1;
  const double hp = std::pow(spec.h, p + 1);
  LocalFitSpec bias_spec = spec;
  bias_spec.p = q;
  bias_spec.h = b;

  auto& bias = out.bias;
  bias.b = b;
  bias.q = q;
  Eigen::VectorXd corrected = Eigen::VectorXd::Zero(data.n());
  Eigen::VectorXd conventional = Eigen::VectorXd::Zero(data.n());
  Eigen::Index nonzero = 0;
  for (Side side : {Side::left, Side::right}) {
    const auto w = fit_weights(sided(spec, side), data.x(), 0);
    const auto g = fit_weights(sided(bias_spec, side), data.x(), q);
    double design = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      if (w.w[i] != 0.0)
        design += w.w[i] * std::pow(data.x()[i] / spec.h, p + 1);
    design /= factorial(p + 1);
    const double deriv = g.apply(lin);
    const double sign = side == Side::right ? 1.0 : -1.0;
    Eigen::VectorXd pbc = w.w - hp * design * g.w;
    corrected += sign * pbc;
    conventional += sign * w.w;
    if (side == Side::right) {
      bias.deriv_right = deriv;
      bias.design_right = design;
      bias.right = design * deriv;
    } else {
      bias.deriv_left = deriv;
      bias.design_left = design;
      bias.left = design * deriv;
    }
  }
  for (Eigen::Index i = 0; i < data.n(); ++i)
    nonzero += corrected[i] != 0.0;
  bias.b_tilde = bias.right - bias.left;
  out.tau_bc = out.tau - hp * bias.b_tilde;

  std::ostringstream target;
  target << "bias-corrected jump, p=" << p << ", q=" << q;
  out.corrected = {std::move(corrected), target.str(), nonzero};
  out.conventional = {std::move(conventional), "jump, p=" + std::to_string(p),
                      out.effective_left + out.effective_right};
  return out;
}

BiasEstimate bias_estimate(const Dataset& data, const LocalFitSpec& spec, double b, EstimatorKind kind)
{
  return bias_corrected_estimate(data, kind, spec, b).bias;
}

VarianceEstimate variance_bc(const Dataset& data, const BiasCorrection& bc, const VarianceOptions& opts)
{
  if (opts.method == VarianceMethod::cluster && !data.cluster())
    throw ConfigError("cluster-robust variance requested without cluster ids");

  detail::ProxyOptions po;
  po.method = opts.method == VarianceMethod::cluster ? VarianceMethod::hc0 : opts.method;
  po.nn_neighbors = opts.nn_neighbors;
  po.kernel = bc.spec.kernel;
  po.fit_order = bc.bias.q;
  po.fit_bandwidth = bc.bias.b;
  po.window = std::max(bc.spec.h, bc.bias.b);
  const Eigen::MatrixXd proxies = detail::residual_proxies(data, po);

  VarianceEstimate out;
  out.method = opts.method;
  out.nn_neighbors = opts.nn_neighbors;
  out.n_clusters = data.n_clusters();
  const int n_params = 2 * (bc.bias.q + 1);
  out.variance = detail::assemble_variance(data, bc.corrected.w, bc.s_hat, proxies, opts, n_params);
  out.v_bc = out.variance * static_cast<double>(data.n()) * bc.spec.h;

  switch (opts.method) {
    case VarianceMethod::nn:
      out.df_note = "nearest-neighbor proxies, J = " + std::to_string(opts.nn_neighbors);
      break;
    case VarianceMethod::hc1:
      out.df_note = "plug-in residuals, n/(n-" + std::to_string(n_params) + ") correction";
      break;
    case VarianceMethod::cluster:
      out.df_note = opts.cluster_dof ? "cluster sums, G/(G-1) correction"
                                     : "cluster sums, no small-G correction";
      break;
    default:
      out.df_note = "plug-in residuals (" + to_string(opts.method) + ")";
  }
  return out;
}

VarianceEstimate variance_bc(const Dataset& data,
                             const LocalFitSpec& spec,
                             double b,
                             const VarianceOptions& opts,
                             EstimatorKind kind)
{
  return variance_bc(data, bias_corrected_estimate(data, kind, spec, b), opts);
}

InferenceResult make_interval(double tau_bc, double v_bc, double nh, double level, double tau0)
{
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("confidence level must lie in (0, 1)");
  if (!(nh > 0.0))
    throw DomainError("n h must be positive");
  if (!(v_bc > 0.0) || !std::isfinite(v_bc))
    throw DegenerateError("bias-corrected variance is zero or not finite; interval is degenerate");
  InferenceResult r;
  r.tau_bc = tau_bc;
  r.v_bc = v_bc;
  r.level = level;
  r.tau0 = tau0;
  r.se = std::sqrt(v_bc / nh);
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  r.ci_low = tau_bc - z * r.se;
  r.ci_high = tau_bc + z * r.se;
  r.t_stat = (tau_bc - tau0) / r.se;
  r.p_value = std::min(1.0, std::erfc(std::abs(r.t_stat) / std::sqrt(2.0)));
  return r;
}

InferenceResult robust_ci(const Dataset& data,
                          const LocalFitSpec& spec,
                          double b,
                          const VarianceOptions& opts,
                          double level,
                          EstimatorKind kind,
                          double tau0)
{
  const auto bc = bias_corrected_estimate(data, kind, spec, b);
  const auto var = variance_bc(data, bc, opts);
  auto r = make_interval(bc.tau_bc, var.v_bc, static_cast<double>(data.n()) * spec.h, level, tau0);
  r.tau = bc.tau;
  r.h = spec.h;
  r.b = b;
  r.effective_left = bc.effective_left;
  r.effective_right = bc.effective_right;
  r.bias = bc.bias;
  r.variance = var;
  r.kind = bc.kind;
  if (!bc.notice.empty())
    r.warnings.push_back(bc.notice);
  if (b < spec.h / 2.0)
    r.warnings.push_back("pilot bandwidth b is less than h/2");
  return r;
}

std::vector<PlaceboRow> placebo_tests(const Dataset& data,
                                      const std::vector<PlaceboSpec>& specs,
                                      const VarianceOptions& opts,
                                      double level)
{
  if (static_cast<Eigen::Index>(specs.size()) != data.d())
    throw ConfigError("placebo_tests needs one bandwidth spec per covariate");
  std::vector<PlaceboRow> rows;
  const Dataset base = data.without_covariates();
  for (Eigen::Index k = 0; k < data.d(); ++k) {
    const Dataset dk = base.with_outcome(data.z().col(k));
    const auto& s = specs[static_cast<size_t>(k)];
    rows.push_back({k, robust_ci(dk, s.spec, s.b, opts, level, EstimatorKind::standard)});
  }
  return rows;
}

double efficiency_ratio(const Dataset& data, const LocalFitSpec& spec, double b, const VarianceOptions& opts)
{
  const auto adjusted = variance_bc(data, spec, b, opts, EstimatorKind::covadj);
  const auto standard = variance_bc(data.without_covariates(), spec, b, opts, EstimatorKind::standard);
  if (!(standard.v_bc > 0.0))
    throw DegenerateError("unadjusted variance is zero; efficiency ratio undefined");
  return adjusted.v_bc / standard.v_bc;
}

} // namespace rdcov
