#include "rdcov/simulate.hpp"

#include "rdcov/error.hpp"
#include "rdcov/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace rdcov {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
// Domain separator for cluster-effect streams.
constexpr std::uint64_t kClusterDomain = 0xC2B2AE3D27D4EB4FULL;

std::uint64_t mix(std::uint64_t z)
{
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double factorial(int k)
{
  double f = 1.0;
  for (int j = 2; j <= k; ++j)
    f *= j;
  return f;
}

// Coefficients of k(u) on [0, 1] as a polynomial in u.
std::vector<double> kernel_poly(Kernel kernel)
{
  switch (kernel.kind) {
    case KernelKind::triangular:
      return {1.0, -1.0};
    case KernelKind::uniform:
      return {1.0};
    case KernelKind::epanechnikov:
      return {0.75, 0.0, -0.75};
  }
  return {1.0};
}

} // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t replication, std::uint64_t unit)
  : key_(mix(mix(mix(seed) ^ replication) + unit * kGolden))
{}

double CounterRng::uniform()
{
  const std::uint64_t bits = mix(key_ ^ (++counter_ * 0xD6E8FEB86659FD93ULL));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal()
{
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Polynomial::operator()(double x) const
{
  double v = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it)
    v = v * x + *it;
  return v;
}

double Polynomial::derivative(int k, double x) const
{
  double v = 0.0;
  for (int j = static_cast<int>(coef.size()) - 1; j >= k; --j)
    v = v * x + coef[j] * factorial(j) / factorial(j - k);
  return v;
}

std::string to_string(ScoreDistribution s)
{
  return s == ScoreDistribution::uniform ? "uniform" : "beta_shifted";
}

double kernel_moment(Kernel kernel, int m, int power)
{
  std::vector<double> c = kernel_poly(kernel);
  if (power == 2) {
    std::vector<double> sq(2 * c.size() - 1, 0.0);
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = 0; b < c.size(); ++b)
        sq[a + b] += c[a] * c[b];
    c = std::move(sq);
  } else if (power != 1) {
    throw DomainError("kernel_moment: power must be 1 or 2");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    s += c[j] / static_cast<double>(m + static_cast<int>(j) + 1);
  return s;
}

// ---------------------------------------------------------------------------
// Population quantities

void DgpSpec::check() const
{
  if (!(sd_y >= 0.0) || !std::isfinite(sd_y))
    throw ConfigError("dgp: sd_y must be finite and non-negative");
  if (!(residual_corr_multiplier >= 0.0) || !std::isfinite(residual_corr_multiplier))
    throw ConfigError("dgp: residual_corr_multiplier must be finite and non-negative");
  if (mu_y_minus.coef.empty() || mu_y_plus.coef.empty())
    throw ConfigError("dgp: mu_y_minus and mu_y_plus need at least one coefficient");
  double r2 = 0.0;
  for (const auto& c : covariates) {
    if (!(c.sd >= 0.0) || !std::isfinite(c.sd))
      throw ConfigError("dgp: covariate sd must be finite and non-negative");
    if (c.mean_minus.coef.empty() || c.mean_plus.coef.empty())
      throw ConfigError("dgp: covariate means need at least one coefficient");
    if (covariate_relevant) {
      const double r = residual_corr_multiplier * c.residual_corr;
      r2 += r * r;
    }
  }
  if (r2 > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "dgp: residual covariance is not positive semidefinite (sum of squared "
           "outcome-covariate residual correlations = "
        << r2 << " > 1)";
    throw ConfigError(msg.str());
  }
  if (cluster.groups < 0 || !(cluster.effect_sd >= 0.0))
    throw ConfigError("dgp: cluster groups and effect_sd must be non-negative");
}

double DgpSpec::tau() const
{
  return mu_y_plus(0.0) - mu_y_minus(0.0);
}

Eigen::VectorXd DgpSpec::mu_z_minus() const
{
  Eigen::VectorXd v(d());
  for (Eigen::Index k = 0; k < d(); ++k)
    v[k] = covariates[k].mean_minus(0.0);
  return v;
}

Eigen::VectorXd DgpSpec::mu_z_plus() const
{
  Eigen::VectorXd v(d());
  for (Eigen::Index k = 0; k < d(); ++k)
    v[k] = covariates[k].mean_plus(0.0);
  return v;
}

Eigen::VectorXd DgpSpec::tau_z() const
{
  return mu_z_plus() - mu_z_minus();
}

Eigen::MatrixXd DgpSpec::sigma2_z() const
{
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d(), d());
  for (Eigen::Index k = 0; k < d(); ++k)
    s(k, k) = covariates[k].sd * covariates[k].sd;
  return s;
}

Eigen::MatrixXd DgpSpec::joint_covariance(Side side) const
{
  const Eigen::Index m = d();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m + 1, m + 1);
  c.bottomRightCorner(m, m) = sigma2_z();
  double var_y = sd_y * sd_y + cluster.effect_sd * cluster.effect_sd;
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& cv = covariates[k];
    const double load = covariate_relevant
                          ? (side == Side::right ? cv.loading_plus : cv.loading_minus)
                          : 0.0;
    const double r = covariate_relevant ? residual_corr_multiplier * cv.residual_corr : 0.0;
    const double cross = r * sd_y * cv.sd;
    var_y += load * load * cv.sd * cv.sd + 2.0 * load * cross;
    c(0, k + 1) = c(k + 1, 0) = load * cv.sd * cv.sd + cross;
  }
  c(0, 0) = var_y;
  return c;
}

Eigen::VectorXd DgpSpec::cov_zy(Side side) const
{
  return joint_covariance(side).col(0).tail(d());
}

namespace {

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
  if (a.rows() == 0)
    return Eigen::VectorXd();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || ldlt.isPositive() == false ||
      ldlt.vectorD().minCoeff() <= 0.0)
    throw DegenerateError("covariate variance matrix is singular");
  return ldlt.solve(b);
}

} // namespace

Eigen::VectorXd DgpSpec::gamma_y_minus() const
{
  return solve_spd(sigma2_z(), cov_zy(Side::left));
}

Eigen::VectorXd DgpSpec::gamma_y_plus() const
{
  return solve_spd(sigma2_z(), cov_zy(Side::right));
}

Eigen::VectorXd DgpSpec::gamma_y() const
{
  const Eigen::MatrixXd s = sigma2_z();
  return solve_spd(s + s, cov_zy(Side::left) + cov_zy(Side::right));
}

double DgpSpec::density_at_cutoff() const
{
  if (score_dist == ScoreDistribution::uniform)
    return 0.5;
  // 2 Beta(2, 4) - 1 at 0: Beta density 20 t (1-t)^3 at t = 1/2, halved.
  return 0.5 * 20.0 * 0.5 * 0.125;
}

namespace {

double residual_variance(const DgpSpec& dgp, Side side, const Eigen::VectorXd& g)
{
  const Eigen::MatrixXd c = dgp.joint_covariance(side);
  const Eigen::Index m = dgp.d();
  if (m == 0 || g.size() == 0)
    return c(0, 0);
  const Eigen::VectorXd cov = c.col(0).tail(m);
  return c(0, 0) - 2.0 * g.dot(cov) + g.dot(c.bottomRightCorner(m, m) * g);
}

} // namespace

double DgpSpec::efficiency_ratio() const
{
  const Eigen::VectorXd g = gamma_y();
  const double adj = residual_variance(*this, Side::left, g) + residual_variance(*this, Side::right, g);
  const double raw = joint_covariance(Side::left)(0, 0) + joint_covariance(Side::right)(0, 0);
  if (raw <= 0.0)
    throw DegenerateError("outcome residual variance is zero");
  return adj / raw;
}

double DgpSpec::probability_limit(EstimatorKind kind) const
{
  if (d() == 0)
    return tau();
  const Eigen::VectorXd zm = mu_z_minus();
  const Eigen::VectorXd zp = mu_z_plus();
  switch (kind) {
    case EstimatorKind::standard:
    case EstimatorKind::demeaned_group_interacted:
      return tau();
    case EstimatorKind::covadj:
    case EstimatorKind::demeaned_common:
      return tau() - tau_z().dot(gamma_y());
    case EstimatorKind::interacted:
      return tau() - (zp.dot(gamma_y_plus()) - zm.dot(gamma_y_minus()));
    case EstimatorKind::demeaned_common_interacted: {
      // The pooled window mean converges to the midpoint since the score
      // density is continuous at the cutoff.
      const Eigen::VectorXd mid = 0.5 * (zp + zm);
      return tau() - ((zp - mid).dot(gamma_y_plus()) - (zm - mid).dot(gamma_y_minus()));
    }
  }
  return tau();
}

DgpSpec::MseConstants DgpSpec::mse_constants(EstimatorKind kind, Kernel kernel, int p) const
{
  if (kind != EstimatorKind::standard && kind != EstimatorKind::covadj)
    throw ConfigError("mse_constants: only standard and covadj are supported");
  const int q = p + 1;
  Eigen::MatrixXd gam(q, q), psi(q, q);
  Eigen::VectorXd lam(q);
  for (int j = 0; j < q; ++j) {
    lam[j] = kernel_moment(kernel, j + p + 1);
    for (int k = 0; k < q; ++k) {
      gam(j, k) = kernel_moment(kernel, j + k);
      psi(j, k) = kernel_moment(kernel, j + k, 2);
    }
  }
  const Eigen::MatrixXd gi = gam.inverse();
  const double c_b = (gi * lam)[0];
  const double c_v = (gi * psi * gi)(0, 0);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(d());
  if (kind == EstimatorKind::covadj && d() > 0)
    g = gamma_y();
  auto deriv = [&](Side side) {
    double v = (side == Side::right ? mu_y_plus : mu_y_minus).derivative(p + 1, 0.0);
    for (Eigen::Index k = 0; k < d(); ++k) {
      const auto& mz = side == Side::right ? covariates[k].mean_plus : covariates[k].mean_minus;
      v -= g[k] * mz.derivative(p + 1, 0.0);
    }
    return v;
  };
  const double sign_left = (p + 1) % 2 == 0 ? 1.0 : -1.0;
  MseConstants out;
  out.bias = c_b / factorial(p + 1) * (deriv(Side::right) - sign_left * deriv(Side::left));
  out.variance = c_v *
                 (residual_variance(*this, Side::left, g) + residual_variance(*this, Side::right, g)) /
                 density_at_cutoff();
  return out;
}

double DgpSpec::infeasible_bandwidth(EstimatorKind kind, Kernel kernel, int p, long n) const
{
  const auto c = mse_constants(kind, kernel, p);
  return mse_bandwidth(c.bias, c.variance, n, p);
}

// ---------------------------------------------------------------------------
// Sampling

Dataset draw(const DgpSpec& dgp, Eigen::Index n, std::uint64_t replication)
{
  dgp.check();
  if (n < 1)
    throw ConfigError("draw: n must be at least 1");
  const Eigen::Index m = dgp.d();

  std::vector<double> effects;
  if (dgp.cluster.groups > 0) {
    effects.resize(static_cast<std::size_t>(dgp.cluster.groups));
    for (int g = 0; g < dgp.cluster.groups; ++g) {
      CounterRng rng(dgp.seed ^ kClusterDomain, replication, static_cast<std::uint64_t>(g));
      effects[static_cast<std::size_t>(g)] = dgp.cluster.effect_sd * rng.normal();
    }
  }

  std::vector<double> r(static_cast<std::size_t>(m), 0.0);
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    r[k] = dgp.covariate_relevant ? dgp.residual_corr_multiplier * dgp.covariates[k].residual_corr : 0.0;
    r2 += r[k] * r[k];
  }
  const double own = std::sqrt(std::max(0.0, 1.0 - r2));

  Eigen::VectorXd y(n), x(n);
  Eigen::MatrixXd z(n, m);
  std::optional<std::vector<int>> cluster;
  if (dgp.cluster.groups > 0)
    cluster.emplace(static_cast<std::size_t>(n));
  std::vector<double> xi(static_cast<std::size_t>(m));

  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(dgp.seed, replication, static_cast<std::uint64_t>(i));
    double s;
    if (dgp.score_dist == ScoreDistribution::uniform) {
      s = 2.0 * rng.uniform() - 1.0;
    } else {
      // Second smallest of five uniforms is Beta(2, 4).
      std::array<double, 5> u{};
      for (auto& v : u)
        v = rng.uniform();
      std::sort(u.begin(), u.end());
      s = 2.0 * u[1] - 1.0;
    }
    const bool right = s >= 0.0;
    double noise = 0.0;
    double common = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      xi[k] = rng.normal();
      const auto& c = dgp.covariates[k];
      const double e = c.sd * xi[k];
      z(i, k) = (right ? c.mean_plus : c.mean_minus)(s) + e;
      if (dgp.covariate_relevant)
        noise += (right ? c.loading_plus : c.loading_minus) * e;
      common += r[k] * xi[k];
    }
    noise += dgp.sd_y * (common + own * rng.normal());
    if (cluster) {
      const int g = static_cast<int>(i % dgp.cluster.groups);
      (*cluster)[static_cast<std::size_t>(i)] = g;
      noise += effects[static_cast<std::size_t>(g)];
    }
    x[i] = s;
    y[i] = (right ? dgp.mu_y_plus : dgp.mu_y_minus)(s) + noise;
  }
  return Dataset(std::move(y), std::move(x), std::move(z), std::move(cluster), 0.0);
}

// ---------------------------------------------------------------------------
// Presets and configuration files

DgpSpec model_preset(int model)
{
  if (model < 1 || model > 4)
    throw ConfigError("model preset must be 1, 2, 3 or 4");
  DgpSpec dgp;
  dgp.name = "model" + std::to_string(model);
  // Different polynomial coefficients on each side; the covariate mean is
  // continuous at the cutoff.
  dgp.mu_y_minus.coef = {0.48, 1.27, 3.0, 1.0};
  dgp.mu_y_plus.coef = {0.52, 0.84, -3.0, 1.0};
  dgp.sd_y = 0.1295;
  CovariateSpec z;
  z.mean_minus.coef = {0.49, 1.2, 1.0};
  z.mean_plus.coef = {0.49, 0.9, -1.0};
  z.sd = 0.2;
  z.loading_minus = 0.25;
  z.loading_plus = 0.35;
  z.residual_corr = 0.35;
  dgp.covariates.push_back(z);
  dgp.score_dist = ScoreDistribution::beta_shifted;
  switch (model) {
    case 1:
      dgp.covariate_relevant = false;
      break;
    case 2:
      dgp.residual_corr_multiplier = 1.0;
      break;
    case 3:
      dgp.residual_corr_multiplier = 0.0;
      break;
    case 4:
      dgp.residual_corr_multiplier = 2.0;
      break;
  }
  return dgp;
}

namespace {

using nlohmann::json;

Polynomial poly_from(const json& j, const std::string& field)
{
  if (!j.is_array())
    throw SchemaError("dgp: '" + field + "' must be an array of numbers");
  Polynomial p;
  for (const auto& v : j) {
    if (!v.is_number())
      throw SchemaError("dgp: '" + field + "' must be an array of numbers");
    p.coef.push_back(v.get<double>());
  }
  return p;
}

template<class T>
T get_or(const json& j, const char* key, T fallback)
{
  if (!j.contains(key))
    return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("dgp: field '") + key + "' has the wrong type");
  }
}

DgpSpec dgp_from_object(const json& j)
{
  if (!j.is_object())
    throw SchemaError("dgp: expected a JSON object");
  DgpSpec dgp;
  if (j.contains("model")) {
    if (!j.at("model").is_number_integer())
      throw SchemaError("dgp: 'model' must be an integer");
    dgp = model_preset(j.at("model").get<int>());
  }
  dgp.name = get_or<std::string>(j, "name", dgp.name);
  dgp.seed = get_or<std::uint64_t>(j, "seed", dgp.seed);
  if (j.contains("mu_y_minus"))
    dgp.mu_y_minus = poly_from(j.at("mu_y_minus"), "mu_y_minus");
  if (j.contains("mu_y_plus"))
    dgp.mu_y_plus = poly_from(j.at("mu_y_plus"), "mu_y_plus");
  dgp.sd_y = get_or<double>(j, "sd_y", dgp.sd_y);
  dgp.residual_corr_multiplier =
    get_or<double>(j, "residual_corr_multiplier", dgp.residual_corr_multiplier);
  dgp.covariate_relevant = get_or<bool>(j, "covariate_relevant", dgp.covariate_relevant);
  if (j.contains("score_dist")) {
    const auto s = get_or<std::string>(j, "score_dist", "");
    if (s == "uniform")
      dgp.score_dist = ScoreDistribution::uniform;
    else if (s == "beta_shifted")
      dgp.score_dist = ScoreDistribution::beta_shifted;
    else
      throw SchemaError("dgp: score_dist must be 'beta_shifted' or 'uniform'");
  }
  if (j.contains("covariates")) {
    const auto& arr = j.at("covariates");
    if (!arr.is_array())
      throw SchemaError("dgp: 'covariates' must be an array");
    dgp.covariates.clear();
    for (const auto& c : arr) {
      if (!c.is_object())
        throw SchemaError("dgp: each covariate must be an object");
      CovariateSpec cs;
      if (!c.contains("mean_minus") || !c.contains("mean_plus"))
        throw SchemaError("dgp: covariate needs 'mean_minus' and 'mean_plus'");
      cs.mean_minus = poly_from(c.at("mean_minus"), "mean_minus");
      cs.mean_plus = poly_from(c.at("mean_plus"), "mean_plus");
      cs.sd = get_or<double>(c, "sd", cs.sd);
      cs.loading_minus = get_or<double>(c, "loading_minus", cs.loading_minus);
      cs.loading_plus = get_or<double>(c, "loading_plus", cs.loading_plus);
      cs.residual_corr = get_or<double>(c, "residual_corr", cs.residual_corr);
      dgp.covariates.push_back(std::move(cs));
    }
  }
  if (j.contains("cluster")) {
    const auto& c = j.at("cluster");
    if (!c.is_object())
      throw SchemaError("dgp: 'cluster' must be an object");
    dgp.cluster.groups = get_or<int>(c, "groups", 0);
    dgp.cluster.effect_sd = get_or<double>(c, "effect_sd", 0.0);
  }
  dgp.check();
  return dgp;
}

} // namespace

DgpSpec dgp_from_json(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("dgp: invalid JSON: ") + e.what());
  }
  return dgp_from_object(j);
}

std::string dgp_to_json(const DgpSpec& dgp)
{
  json j;
  j["name"] = dgp.name;
  j["seed"] = dgp.seed;
  j["mu_y_minus"] = dgp.mu_y_minus.coef;
  j["mu_y_plus"] = dgp.mu_y_plus.coef;
  j["sd_y"] = dgp.sd_y;
  j["residual_corr_multiplier"] = dgp.residual_corr_multiplier;
  j["covariate_relevant"] = dgp.covariate_relevant;
  j["score_dist"] = to_string(dgp.score_dist);
  j["covariates"] = json::array();
  for (const auto& c : dgp.covariates)
    j["covariates"].push_back({{"mean_minus", c.mean_minus.coef},
                               {"mean_plus", c.mean_plus.coef},
                               {"sd", c.sd},
                               {"loading_minus", c.loading_minus},
                               {"loading_plus", c.loading_plus},
                               {"residual_corr", c.residual_corr}});
  j["cluster"] = {{"groups", dgp.cluster.groups}, {"effect_sd", dgp.cluster.effect_sd}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Studies

namespace {

struct RepOutcome
{
  bool ok = false;
  double tau = 0.0;
  double tau_bc = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double h = 0.0;
  double b = 0.0;
};

double mean_of(const std::vector<double>& v)
{
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v)
{
  if (v.empty())
    return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

MethodSummary summarize(EstimatorKind kind, double target, const std::vector<RepOutcome>& reps)
{
  MethodSummary s;
  s.kind = kind;
  s.target = target;
  std::vector<double> est, bc, sq, cover, len, hs, bs;
  for (const auto& r : reps) {
    if (!r.ok) {
      ++s.failures;
      continue;
    }
    est.push_back(r.tau);
    bc.push_back(r.tau_bc);
    sq.push_back((r.tau - target) * (r.tau - target));
    cover.push_back(r.ci_low <= target && target <= r.ci_high ? 1.0 : 0.0);
    len.push_back(r.ci_high - r.ci_low);
    hs.push_back(r.h);
    bs.push_back(r.b);
  }
  s.successes = static_cast<int>(est.size());
  s.failure_rate = reps.empty() ? 0.0 : static_cast<double>(s.failures) / static_cast<double>(reps.size());
  if (est.empty())
    return s;
  s.mean_estimate = mean_of(est);
  s.bias = s.mean_estimate - target;
  std::vector<double> dev(est.size());
  for (std::size_t i = 0; i < est.size(); ++i)
    dev[i] = (est[i] - s.mean_estimate) * (est[i] - s.mean_estimate);
  s.variance = est.size() > 1 ? pairwise_sum(dev) / static_cast<double>(est.size() - 1) : 0.0;
  s.mse = mean_of(sq);
  s.mean_bc = mean_of(bc);
  s.coverage = mean_of(cover);
  s.mean_ci_length = mean_of(len);
  s.mean_h = mean_of(hs);
  s.median_h = median_of(hs);
  s.mean_b = mean_of(bs);
  s.median_b = median_of(bs);
  return s;
}

} // namespace

StudyReport run_study(const DgpSpec& dgp, const StudyConfig& config)
{
  dgp.check();
  if (config.reps < 1)
    throw ConfigError("run_study: reps must be at least 1");
  if (config.n < 1)
    throw ConfigError("run_study: n must be at least 1");
  if (config.methods.empty())
    throw ConfigError("run_study: at least one method is required");
  for (auto k : config.methods)
    if (k != EstimatorKind::standard && k != EstimatorKind::covadj)
      throw ConfigError("run_study: methods must be 'standard' or 'covadj' (got '" + to_string(k) +
                        "')");
  if (config.b && !config.h)
    throw ConfigError("run_study: a fixed b requires a fixed h");

  const std::size_t n_methods = config.methods.size();
  std::vector<std::vector<RepOutcome>> outcomes(n_methods,
                                                std::vector<RepOutcome>(static_cast<std::size_t>(config.reps)));

  parallel_for(config.reps, config.workers, [&](int rep) {
    const Dataset data = draw(dgp, config.n, static_cast<std::uint64_t>(rep));
    for (std::size_t m = 0; m < n_methods; ++m) {
      const EstimatorKind kind = config.methods[m];
      RepOutcome& out = outcomes[m][static_cast<std::size_t>(rep)];
      try {
        double h, b;
        if (config.h) {
          h = *config.h;
          b = config.b ? *config.b : h;
        } else {
          const auto sel = select_bandwidth(data, kind, config.kernel, config.p, config.select);
          h = sel.h;
          b = sel.b;
        }
        LocalFitSpec spec;
        spec.kernel = config.kernel;
        spec.p = config.p;
        spec.h = h;
        const auto res = robust_ci(data, spec, b, config.select.vce, config.level, kind);
        out.ok = std::isfinite(res.tau_bc) && std::isfinite(res.ci_low) && std::isfinite(res.ci_high);
        out.tau = res.tau;
        out.tau_bc = res.tau_bc;
        out.ci_low = res.ci_low;
        out.ci_high = res.ci_high;
        out.h = h;
        out.b = b;
      } catch (const NumericError&) {
        out.ok = false;
      }
    }
  });

  StudyReport report;
  report.dgp = dgp.name;
  report.seed = dgp.seed;
  report.n = config.n;
  report.reps = config.reps;
  if (config.h)
    report.bandwidth_rule = "manual";
  else
    report.bandwidth_rule = config.select.cer ? "cerrd" : "mserd";
  report.vce = to_string(config.select.vce.method);
  for (std::size_t m = 0; m < n_methods; ++m)
    report.methods.push_back(summarize(config.methods[m], dgp.tau(), outcomes[m]));
  return report;
}

} // namespace rdcov
