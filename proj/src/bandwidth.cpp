#include "rdcov/bandwidth.hpp"

#include "rdcov/error.hpp"
#include "residuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rdcov {

std::string to_string(BandwidthRule rule)
{
  switch (rule) {
    case BandwidthRule::mse_covadj:
      return "mse_covadj";
    case BandwidthRule::mse_standard:
      return "mse_standard";
    case BandwidthRule::cer_covadj:
      return "cer_covadj";
    case BandwidthRule::cer_standard:
      return "cer_standard";
    case BandwidthRule::manual:
      return "manual";
  }
  return "?";
}

namespace {

double factorial(int k)
{
  double f = 1.0;
  for (int j = 2; j <= k; ++j)
    f *= j;
  return f;
}

// Minimizer of h^{2(o+1-nu)} B^2 + V / (n h^{1+2nu}).
double optimal_bandwidth(double bias, double variance, long n, int order, int deriv)
{
  const double num = (1.0 + 2.0 * deriv) * variance;
  const double den = 2.0 * (order + 1 - deriv) * static_cast<double>(n) * bias * bias;
  return std::pow(num / den, 1.0 / (2.0 * order + 3.0));
}

LocalFitSpec side_spec(Kernel kernel, int p, double h, Side side)
{
  LocalFitSpec s;
  s.kernel = kernel;
  s.p = p;
  s.h = h;
  s.side = side;
  return s;
}

double sample_sd(const Eigen::VectorXd& x)
{
  const double mean = x.mean();
  const double ss = (x.array() - mean).square().sum();
  return x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
}

double moment(const LinearWeights& w, const Eigen::VectorXd& x, double scale, int power)
{
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (w.w[i] != 0.0)
      s += w.w[i] * std::pow(x[i] / scale, power);
  return s;
}

} // namespace

double mse_bandwidth(double bias_constant, double variance_constant, long n, int p)
{
  if (n < 1)
    throw DomainError("sample size must be at least 1");
  if (!(variance_constant > 0.0) || !std::isfinite(variance_constant))
    throw DomainError("variance constant must be positive");
  if (bias_constant == 0.0 || !std::isfinite(bias_constant))
    throw DomainError("bias constant is zero: the MSE-optimal bandwidth is unbounded; use the "
                      "regularized selector");
  if (p < 0 || p > kMaxOrder)
    throw DomainError("polynomial order out of range");
  return optimal_bandwidth(bias_constant, variance_constant, n, p, 0);
}

double cer_factor(long n, int p)
{
  if (n < 1)
    throw DomainError("sample size must be at least 1");
  const double exponent = -static_cast<double>(p) / ((3.0 + 2.0 * p) * (3.0 + p));
  return std::pow(static_cast<double>(n), exponent);
}

double cer_bandwidth(double h_mse, long n, int p)
{
  if (!(h_mse > 0.0))
    throw DomainError("MSE bandwidth must be positive");
  return h_mse * cer_factor(n, p);
}

double min_bandwidth(const Dataset& data, Kernel kernel, int k)
{
  double need = 0.0;
  for (Side side : {Side::left, Side::right}) {
    std::vector<double> dist;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      if (on_side(data.x()[i], side))
        dist.push_back(std::abs(data.x()[i]));
    std::sort(dist.begin(), dist.end());
    dist.erase(std::unique(dist.begin(), dist.end()), dist.end());
    if (static_cast<int>(dist.size()) < k) {
      std::ostringstream msg;
      msg << "only " << dist.size() << " distinct scores on the " << to_string(side)
          << " side; at least " << k << " needed";
      throw InsufficientDataError(msg.str());
    }
    need = std::max(need, dist[static_cast<size_t>(k - 1)]);
  }
  // Triangular and Epanechnikov give zero weight at |u| = 1.
  if (kernel.kind != KernelKind::uniform)
    need *= 1.0 + 1e-9;
  return need > 0.0 ? need : std::numeric_limits<double>::min();
}

BandwidthSelection select_bandwidth(const Dataset& data,
                                    EstimatorKind kind,
                                    Kernel kernel,
                                    int p,
                                    const SelectOptions& opts)
{
  data.require_two_sided();
  if (p < 0 || p > kMaxOrder)
    throw DomainError("polynomial order out of range");
  if (kind != EstimatorKind::standard && kind != EstimatorKind::covadj)
    throw ConfigError("bandwidth selection is available for the standard and covadj estimators");
  if (opts.vce.method == VarianceMethod::cluster && !data.cluster())
    throw ConfigError("cluster-robust variance requested without cluster ids");

  const bool adjust = kind == EstimatorKind::covadj && data.d() > 0;
  BandwidthSelection out;
  if (kind == EstimatorKind::covadj && data.d() == 0)
    out.notices.push_back("covadj requested without covariates; selecting for standard");
  out.rule = adjust ? (opts.cer ? BandwidthRule::cer_covadj : BandwidthRule::mse_covadj)
                    : (opts.cer ? BandwidthRule::cer_standard : BandwidthRule::mse_standard);

  const long n = static_cast<long>(data.n());
  const int q = p + 1;
  const auto& x = data.x();
  const double x_max = x.cwiseAbs().maxCoeff();
  const double h_floor = min_bandwidth(data, kernel, p + 2);
  auto clamp = [&](double h, const char* what) {
    if (!std::isfinite(h) || h > x_max) {
      out.notices.push_back(std::string(what) + " clamped to max |x|");
      h = x_max;
    }
    if (h < h_floor) {
      out.notices.push_back(std::string(what) + " raised to admit " + std::to_string(p + 2) +
                            " distinct scores per side");
      h = h_floor;
    }
    return h;
  };
  auto& tr = out.pilot;

  // Stage 1: normal-reference pilot.
  tr.sigma_x = sample_sd(x);
  const double v0 = opts.c0 * tr.sigma_x * std::pow(static_cast<double>(n), -0.2);
  const double v_floor = min_bandwidth(data, kernel, std::max(q + 1, opts.vce.nn_neighbors + 2));
  tr.v = std::min(std::max(v0, v_floor), x_max);
  if (tr.v != v0)
    out.notices.push_back("pilot bandwidth v clamped to the data");

  LocalFitSpec vspec;
  vspec.kernel = kernel;
  vspec.p = p;
  vspec.h = tr.v;
  Eigen::VectorXd gamma;
  Eigen::VectorXd s = Eigen::VectorXd::Ones(1 + data.d());
  if (data.d() > 0)
    s.tail(data.d()).setZero();
  if (adjust) {
    gamma = estimate(data, EstimatorKind::covadj, vspec).gamma;
    s.tail(data.d()) = -gamma;
  }
  Eigen::VectorXd lin = data.y();
  if (adjust)
    lin -= data.z() * gamma;

  auto proxies = [&](int fit_order, double fit_bw, double window) {
    detail::ProxyOptions po;
    po.method = opts.vce.method == VarianceMethod::cluster ? VarianceMethod::hc0 : opts.vce.method;
    po.nn_neighbors = opts.vce.nn_neighbors;
    po.kernel = kernel;
    po.fit_order = fit_order;
    po.fit_bandwidth = fit_bw;
    po.window = window;
    return detail::residual_proxies(data, po);
  };
  auto variance_of = [&](const Eigen::VectorXd& w, const Eigen::MatrixXd& e) {
    return detail::assemble_variance(data, w, s, e, opts.vce, 2 * (q + 1));
  };

  // Pieces at the pilot v: intercept weights (order p) and derivative
  // weights (order q) per side, with their design constants.
  struct SideFits
  {
    LinearWeights w, g;
    double design = 0.0;    // sum w (x/v)^{p+1} / (p+1)!
    double g_moment = 0.0;  // sum g x^{q+1} / (q+1)!
  };
  SideFits left, right;
  for (Side side : {Side::left, Side::right}) {
    auto& f = side == Side::left ? left : right;
    f.w = fit_weights(side_spec(kernel, p, tr.v, side), x, 0);
    f.g = fit_weights(side_spec(kernel, q, tr.v, side), x, q);
    f.design = moment(f.w, x, tr.v, p + 1) / factorial(p + 1);
    f.g_moment = moment(f.g, x, 1.0, q + 1) / factorial(q + 1);
  }
  const Eigen::MatrixXd e_v = proxies(q, tr.v, tr.v);

  // Stage 2: b for the bias-correction estimand, with its own bias taken
  // from global order-(p+2) fits on each side.
  {
    double high[2];
    LinearWeights high_w[2];
    int idx = 0;
    for (Side side : {Side::left, Side::right}) {
      double range = 0.0;
      for (Eigen::Index i = 0; i < data.n(); ++i)
        if (on_side(x[i], side))
          range = std::max(range, std::abs(x[i]));
      range *= 1.0 + 1e-8;
      (side == Side::left ? tr.global_left : tr.global_right) = range;
      high_w[idx] = fit_weights(side_spec(kernel, q + 1, range, side), x, q + 1);
      high[idx] = high_w[idx].apply(lin);
      ++idx;
    }
    tr.deriv_high_left = high[0];
    tr.deriv_high_right = high[1];
    const double v = tr.v;
    // bias of the derivative estimator scales like v^{q+1-(p+1)} = v.
    tr.bias_b = (right.design * right.g_moment * high[1] - left.design * left.g_moment * high[0]) / v;
    const Eigen::VectorXd wb = right.design * right.g.w - left.design * left.g.w;
    tr.variance_b = variance_of(wb, e_v) * static_cast<double>(n) * std::pow(v, 1 + 2 * q);

    double bias2 = tr.bias_b * tr.bias_b;
    if (bias2 < opts.regularization_eps * std::sqrt(tr.variance_b / static_cast<double>(n))) {
      double range = std::max(tr.global_left, tr.global_right);
      const Eigen::VectorXd wr = (right.design * right.g_moment / v) * high_w[1].w -
                                 (left.design * left.g_moment / v) * high_w[0].w;
      bias2 += variance_of(wr, proxies(q + 1, range, range));
      tr.regularized_b = true;
      out.notices.push_back("near-zero bias for b: regularized");
    }
    if (!(bias2 > 0.0) || !(tr.variance_b > 0.0))
      throw DegenerateError("cannot select b: zero bias and variance estimates");
    tr.b_mse = std::pow((2.0 * q + 1.0) * tr.variance_b /
                          (2.0 * static_cast<double>(n) * bias2),
                        1.0 / (2.0 * q + 3.0));
  }
  double b = clamp(tr.b_mse, "b");

  // Stage 3: h for the order-p jump, bias from order-q fits at b.
  {
    const auto g_left = fit_weights(side_spec(kernel, q, b, Side::left), x, q);
    const auto g_right = fit_weights(side_spec(kernel, q, b, Side::right), x, q);
    tr.deriv_left = g_left.apply(lin);
    tr.deriv_right = g_right.apply(lin);
    tr.bias_h = right.design * tr.deriv_right - left.design * tr.deriv_left;
    const Eigen::VectorXd wh = right.w.w - left.w.w;
    tr.variance_h = variance_of(wh, e_v) * static_cast<double>(n) * tr.v;

    double bias2 = tr.bias_h * tr.bias_h;
    if (bias2 < opts.regularization_eps * std::sqrt(tr.variance_h / static_cast<double>(n))) {
      const Eigen::VectorXd wr = right.design * g_right.w - left.design * g_left.w;
      bias2 += variance_of(wr, proxies(q, b, b));
      tr.regularized_h = true;
      out.notices.push_back("near-zero bias for h: regularized");
    }
    if (!(bias2 > 0.0) || !(tr.variance_h > 0.0))
      throw DegenerateError("cannot select h: zero bias and variance estimates");
    tr.h_mse = mse_bandwidth(std::sqrt(bias2), tr.variance_h, n, p);
  }

  double h = tr.h_mse;
  if (opts.cer) {
    tr.cer_factor = cer_factor(n, p);
    tr.cer_note = "h and b multiplied by n^{-p/((3+2p)(3+p))}" +
                  std::string(p == 1 ? " = n^{-1/20}" : " (rate-scaling convention for p != 1)");
    h *= tr.cer_factor;
    b *= tr.cer_factor;
  }
  out.h = clamp(h, "h");
  out.b = opts.b_equals_h ? out.h : clamp(b, "b");
  return out;
}

} // namespace rdcov
