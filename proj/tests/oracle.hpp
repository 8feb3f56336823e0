#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: designs are built from raw powers, systems are solved from the
// normal equations in long double, and neighbor searches are brute force.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using LD = long double;
using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>; // row-major, rows = units

enum class K
{
  tri,
  uni,
  epa
};

inline LD kern(K k, LD u)
{
  const LD a = std::fabs(u);
  if (a > 1)
    return 0;
  switch (k) {
    case K::tri:
      return 1 - a;
    case K::uni:
      return 1;
    case K::epa:
      return LD(0.75) * (1 - a * a);
  }
  return 0;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<LD> solve(std::vector<std::vector<LD>> a, std::vector<LD> b)
{
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c]))
        piv = r;
    if (a[piv][c] == 0)
      throw std::runtime_error("oracle: singular system");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const LD f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k)
        a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<LD> x(n);
  for (std::size_t i = n; i-- > 0;) {
    LD s = b[i];
    for (std::size_t k = i + 1; k < n; ++k)
      s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<LD>> inverse(const std::vector<std::vector<LD>>& a)
{
  const std::size_t n = a.size();
  std::vector<std::vector<LD>> inv(n, std::vector<LD>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<LD> e(n, 0);
    e[j] = 1;
    const auto col = solve(a, e);
    for (std::size_t i = 0; i < n; ++i)
      inv[i][j] = col[i];
  }
  return inv;
}

// Weighted least squares through the normal equations.
inline std::vector<LD> wls(const std::vector<std::vector<LD>>& X, const std::vector<LD>& w, const std::vector<LD>& y)
{
  const std::size_t k = X.empty() ? 0 : X[0].size();
  std::vector<std::vector<LD>> xtx(k, std::vector<LD>(k, 0));
  std::vector<LD> xty(k, 0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += w[i] * X[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b)
        xtx[a][b] += w[i] * X[i][a] * X[i][b];
    }
  }
  return solve(xtx, xty);
}

inline LD ipow(LD x, int k)
{
  LD r = 1;
  for (int j = 0; j < k; ++j)
    r *= x;
  return r;
}

inline LD fact(int k)
{
  LD f = 1;
  for (int j = 2; j <= k; ++j)
    f *= j;
  return f;
}

enum class Kind
{
  standard,
  covadj,
  interacted,
  demeaned_common,
  demeaned_common_interacted,
  demeaned_group_interacted
};

// Coefficients of the pooled RD regression [1, T, x, Tx, ..., x^p, Tx^p, extras].
inline Vec rd_coefficients(const Vec& x, const Vec& y, const Mat& z, Kind kind, K k, int p, double h)
{
  const std::size_t n = x.size();
  const std::size_t d = z.empty() ? 0 : z[0].size();
  // Unweighted window means over |x| <= h.
  std::vector<LD> all(d, 0), left(d, 0), right(d, 0);
  LD nl = 0, nr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(x[i]) > h)
      continue;
    const bool t = x[i] >= 0;
    (t ? nr : nl) += 1;
    for (std::size_t j = 0; j < d; ++j)
      (t ? right : left)[j] += z[i][j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    all[j] = (left[j] + right[j]) / (nl + nr);
    left[j] /= nl;
    right[j] /= nr;
  }

  std::vector<std::vector<LD>> X;
  std::vector<LD> w, yy;
  for (std::size_t i = 0; i < n; ++i) {
    const LD kw = kern(k, LD(x[i]) / h);
    if (kw <= 0)
      continue;
    const LD t = x[i] >= 0 ? 1 : 0;
    std::vector<LD> row;
    for (int j = 0; j <= p; ++j) {
      row.push_back(ipow(x[i], j));
      row.push_back(t * ipow(x[i], j));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const LD zj = z[i][j];
      switch (kind) {
        case Kind::standard:
          break;
        case Kind::covadj:
          row.push_back(zj);
          break;
        case Kind::demeaned_common:
          row.push_back(zj - all[j]);
          break;
        default:
          break;
      }
    }
    if (kind == Kind::interacted || kind == Kind::demeaned_common_interacted ||
        kind == Kind::demeaned_group_interacted) {
      for (int side = 0; side < 2; ++side)
        for (std::size_t j = 0; j < d; ++j) {
          const LD zj = z[i][j];
          LD c = zj;
          if (kind == Kind::demeaned_common_interacted)
            c = zj - all[j];
          if (kind == Kind::demeaned_group_interacted)
            c = zj - (side == 0 ? left[j] : right[j]);
          row.push_back((side == 0 ? 1 - t : t) * c);
        }
    }
    X.push_back(row);
    w.push_back(kw);
    yy.push_back(y[i]);
  }
  const auto beta = wls(X, w, yy);
  return Vec(beta.begin(), beta.end());
}

// Weights of the derivative-th derivative at 0 of the side-specific order-p fit.
inline Vec side_weights(const Vec& x, bool right, K k, int p, double h, int derivative)
{
  const std::size_t n = x.size();
  std::vector<std::size_t> rows;
  std::vector<LD> kw;
  for (std::size_t i = 0; i < n; ++i) {
    if ((x[i] >= 0) != right)
      continue;
    const LD w = kern(k, LD(x[i]) / h);
    if (w > 0) {
      rows.push_back(i);
      kw.push_back(w);
    }
  }
  std::vector<std::vector<LD>> g(p + 1, std::vector<LD>(p + 1, 0));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (int a = 0; a <= p; ++a)
      for (int b = 0; b <= p; ++b)
        g[a][b] += kw[r] * ipow(x[rows[r]], a + b);
  const auto gi = inverse(g);
  Vec out(n, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    LD s = 0;
    for (int b = 0; b <= p; ++b)
      s += gi[derivative][b] * ipow(x[rows[r]], b);
    out[rows[r]] = static_cast<double>(fact(derivative) * s * kw[r]);
  }
  return out;
}

// Brute-force J nearest same-side neighbors within |x| <= window, ties by index.
inline std::vector<std::size_t> neighbors(const Vec& x, std::size_t i, int J, double window)
{
  std::vector<std::pair<double, std::size_t>> c;
  const bool right = x[i] >= 0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (j != i && (x[j] >= 0) == right && std::fabs(x[j]) <= window)
      c.emplace_back(std::fabs(x[j] - x[i]), j);
  std::sort(c.begin(), c.end());
  std::vector<std::size_t> out;
  for (int a = 0; a < J; ++a)
    out.push_back(c[static_cast<std::size_t>(a)].second);
  return out;
}

enum class Vce
{
  nn,
  hc0,
  hc3
};

struct Robust
{
  double tau = 0, tau_bc = 0, variance = 0, b_tilde = 0;
};

// No-covariate robust bias-corrected estimator and its variance.
inline Robust no_covariate_robust(const Vec& x, const Vec& y, K k, int p, double h, double b, Vce vce, int J = 3)
{
  const std::size_t n = x.size();
  const int q = p + 1;
  Robust r;
  Vec wbc(n, 0.0);
  for (int side = 0; side < 2; ++side) {
    const bool right = side == 1;
    const Vec w = side_weights(x, right, k, p, h, 0);
    const Vec g = side_weights(x, right, k, q, b, q);
    LD design = 0, a0 = 0, deriv = 0;
    for (std::size_t i = 0; i < n; ++i) {
      design += w[i] * ipow(LD(x[i]) / h, p + 1);
      a0 += w[i] * y[i];
      deriv += g[i] * y[i];
    }
    design /= fact(p + 1);
    const LD sign = right ? 1 : -1;
    r.tau += static_cast<double>(sign * a0);
    r.b_tilde += static_cast<double>(sign * design * deriv);
    for (std::size_t i = 0; i < n; ++i)
      wbc[i] += static_cast<double>(sign * (w[i] - ipow(h, p + 1) * design * g[i]));
  }
  r.tau_bc = r.tau - std::pow(h, p + 1) * r.b_tilde;

  const double window = std::max(h, b);
  Vec e(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(x[i]) > window)
      continue;
    if (vce == Vce::nn) {
      const auto nb = neighbors(x, i, J, window);
      LD m = 0;
      for (auto j : nb)
        m += y[j];
      m /= J;
      e[i] = static_cast<double>(std::sqrt(LD(J) / (J + 1)) * (y[i] - m));
    }
  }
  if (vce != Vce::nn) {
    // Residuals of the order-q side fit at b.
    for (int side = 0; side < 2; ++side) {
      const bool right = side == 1;
      std::vector<std::vector<LD>> X;
      std::vector<LD> w, yy;
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < n; ++i) {
        if ((x[i] >= 0) != right)
          continue;
        const LD kw = kern(k, LD(x[i]) / b);
        if (kw <= 0)
          continue;
        std::vector<LD> row;
        for (int j = 0; j <= q; ++j)
          row.push_back(ipow(x[i], j));
        X.push_back(row);
        w.push_back(kw);
        yy.push_back(y[i]);
        rows.push_back(i);
      }
      const auto beta = wls(X, w, yy);
      std::vector<std::vector<LD>> g(q + 1, std::vector<LD>(q + 1, 0));
      for (std::size_t r2 = 0; r2 < X.size(); ++r2)
        for (int a = 0; a <= q; ++a)
          for (int c = 0; c <= q; ++c)
            g[a][c] += w[r2] * X[r2][a] * X[r2][c];
      const auto gi = inverse(g);
      for (std::size_t i = 0; i < n; ++i) {
        if ((x[i] >= 0) != right || std::fabs(x[i]) > window)
          continue;
        LD fit = 0;
        for (int j = 0; j <= q; ++j)
          fit += beta[j] * ipow(x[i], j);
        LD res = y[i] - fit;
        if (vce == Vce::hc3) {
          const LD kw = kern(k, LD(x[i]) / b);
          LD lev = 0;
          for (int a = 0; a <= q; ++a)
            for (int c = 0; c <= q; ++c)
              lev += ipow(x[i], a) * gi[a][c] * ipow(x[i], c);
          res /= 1 - kw * lev;
        }
        e[i] = static_cast<double>(res);
      }
    }
  }
  LD v = 0;
  for (std::size_t i = 0; i < n; ++i)
    v += LD(wbc[i]) * wbc[i] * e[i] * e[i];
  r.variance = static_cast<double>(v);
  return r;
}

inline double max_abs_diff(const Vec& a, const Vec& b)
{
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

} // namespace oracle
