#include "residuals.hpp"

#include "rdcov/error.hpp"
#include "rdcov/numeric.hpp"
#include "wls.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace rdcov::detail {

namespace {

std::vector<Eigen::Index> side_pool(const Eigen::VectorXd& x, Side side, double window)
{
  std::vector<Eigen::Index> pool;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (on_side(x[i], side) && std::abs(x[i]) <= window)
      pool.push_back(i);
  return pool;
}

// Columns (y, Z) of the dataset as one matrix.
Eigen::MatrixXd stacked_columns(const Dataset& data)
{
  Eigen::MatrixXd v(data.n(), 1 + data.d());
  v.col(0) = data.y();
  if (data.d() > 0)
    v.rightCols(data.d()) = data.z();
  return v;
}

void nn_proxies(const Dataset& data,
                const std::vector<Eigen::Index>& pool,
                int neighbors,
                const Eigen::MatrixXd& v,
                Eigen::MatrixXd& out)
{
  const auto nbrs = nearest_neighbors(data.x(), pool, neighbors);
  const double scale = std::sqrt(neighbors / (neighbors + 1.0));
  for (size_t a = 0; a < pool.size(); ++a) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(v.cols());
    for (auto j : nbrs[a])
      mean += v.row(j);
    mean /= static_cast<double>(neighbors);
    out.row(pool[a]) = scale * (v.row(pool[a]) - mean);
  }
}

void fit_proxies(const Dataset& data,
                 Side side,
                 const std::vector<Eigen::Index>& pool,
                 const ProxyOptions& opts,
                 const Eigen::MatrixXd& v,
                 Eigen::MatrixXd& out)
{
  const auto& x = data.x();
  const int o = opts.fit_order;
  const double bw = opts.fit_bandwidth;

  std::vector<Eigen::Index> rows;
  std::vector<double> kw;
  for (auto i : pool) {
    const double k = kernel_weight(opts.kernel, x[i] / bw);
    if (k > 0.0) {
      rows.push_back(i);
      kw.push_back(k);
    }
  }
  // Units beyond the fit bandwidth are also eligible for the pool, so fit
  // on every same-side unit with positive weight, not just the pool.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!on_side(x[i], side) || std::abs(x[i]) <= opts.window)
      continue;
    const double k = kernel_weight(opts.kernel, x[i] / bw);
    if (k > 0.0) {
      rows.push_back(i);
      kw.push_back(k);
    }
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(m, o + 1);
  Eigen::VectorXd weights(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    design.row(r) = scaled_powers(x[rows[r]], bw, o);
    weights[r] = kw[r];
  }
  WeightedLeastSquares wls(design, weights);
  if (!wls.full_rank()) {
    std::ostringstream msg;
    msg << "rank-deficient residual fit on the " << to_string(side) << " side at bandwidth "
        << bw;
    throw InsufficientDataError(msg.str());
  }
  Eigen::MatrixXd vv(m, v.cols());
  for (Eigen::Index r = 0; r < m; ++r)
    vv.row(r) = v.row(rows[r]);
  const Eigen::MatrixXd beta = wls.projection() * vv;

  std::map<Eigen::Index, double> leverage;
  for (Eigen::Index r = 0; r < m; ++r)
    leverage[rows[r]] = wls.leverage()[r];

  for (auto i : pool) {
    Eigen::RowVectorXd e = v.row(i) - scaled_powers(x[i], bw, o) * beta;
    if (opts.method == VarianceMethod::hc2 || opts.method == VarianceMethod::hc3) {
      auto it = leverage.find(i);
      const double hii = it == leverage.end() ? 0.0 : it->second;
      if (hii >= 1.0)
        throw DegenerateError("leverage of one in the residual fit; HC2/HC3 undefined");
      e /= opts.method == VarianceMethod::hc2 ? std::sqrt(1.0 - hii) : (1.0 - hii);
    }
    out.row(i) = e;
  }
}

} // namespace

std::vector<std::vector<Eigen::Index>> nearest_neighbors(const Eigen::VectorXd& x,
                                                         const std::vector<Eigen::Index>& pool,
                                                         int neighbors)
{
  const auto m = static_cast<Eigen::Index>(pool.size());
  if (neighbors < 1)
    throw ConfigError("number of nearest neighbors must be at least 1");
  if (neighbors > m - 1) {
    std::ostringstream msg;
    msg << "nearest-neighbor variance needs J <= side size - 1 (J = " << neighbors
        << ", side size = " << m << ")";
    throw InsufficientDataError(msg.str());
  }
  std::vector<Eigen::Index> sorted = pool;
  std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
    return x[a] < x[b] || (x[a] == x[b] && a < b);
  });
  std::map<Eigen::Index, size_t> where;
  for (size_t r = 0; r < sorted.size(); ++r)
    where[sorted[r]] = r;

  std::vector<std::vector<Eigen::Index>> out(pool.size());
  std::vector<std::pair<double, Eigen::Index>> cand;
  for (size_t a = 0; a < pool.size(); ++a) {
    const auto self = pool[a];
    const auto pos = static_cast<Eigen::Index>(where[self]);
    const double xi = x[self];
    cand.clear();
    // Walk outward on each side; keep going past J while distances tie so
    // that index-order tie-breaking sees every candidate at the cutoff distance.
    for (int dir : {-1, 1}) {
      int taken = 0;
      double last = 0.0;
      for (Eigen::Index r = pos + dir; r >= 0 && r < m; r += dir) {
        const double dist = std::abs(x[sorted[r]] - xi);
        if (taken >= neighbors && dist > last)
          break;
        cand.emplace_back(dist, sorted[r]);
        last = dist;
        ++taken;
      }
    }
    std::sort(cand.begin(), cand.end());
    out[a].reserve(neighbors);
    for (int j = 0; j < neighbors; ++j)
      out[a].push_back(cand[j].second);
  }
  return out;
}

Eigen::MatrixXd residual_proxies(const Dataset& data, const ProxyOptions& opts)
{
  const Eigen::MatrixXd v = stacked_columns(data);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.n(), v.cols());
  for (Side side : {Side::left, Side::right}) {
    const auto pool = side_pool(data.x(), side, opts.window);
    if (pool.empty())
      continue;
    if (opts.method == VarianceMethod::nn)
      nn_proxies(data, pool, opts.nn_neighbors, v, out);
    else
      fit_proxies(data, side, pool, opts, v, out);
  }
  return out;
}

double assemble_variance(const Dataset& data,
                         const Eigen::VectorXd& w,
                         const Eigen::VectorXd& s,
                         const Eigen::MatrixXd& proxies,
                         const VarianceOptions& opts,
                         int n_params)
{
  const auto n = data.n();
  if (opts.method == VarianceMethod::cluster) {
    if (!data.cluster())
      throw ConfigError("cluster-robust variance requested without cluster ids");
    const auto& ids = *data.cluster();
    std::map<int, std::vector<double>> scores;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w[i] == 0.0)
        continue;
      scores[ids[i]].push_back(w[i] * proxies.row(i).dot(s));
    }
    std::vector<double> squares;
    squares.reserve(scores.size());
    for (const auto& [id, terms] : scores) {
      const double g = pairwise_sum(terms);
      squares.push_back(g * g);
    }
    double v = pairwise_sum(squares);
    const auto groups = static_cast<double>(squares.size());
    if (opts.cluster_dof && groups > 1.0)
      v *= groups / (groups - 1.0);
    return v;
  }

  std::vector<double> terms;
  terms.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w[i] == 0.0)
      continue;
    const double e = proxies.row(i).dot(s);
    terms.push_back(w[i] * w[i] * e * e);
  }
  double v = pairwise_sum(terms);
  if (opts.method == VarianceMethod::hc1) {
    const auto used = static_cast<double>(terms.size());
    if (used <= n_params)
      throw InsufficientDataError("HC1 correction needs more observations than parameters");
    v *= used / (used - n_params);
  }
  return v;
}

} // namespace rdcov::detail
