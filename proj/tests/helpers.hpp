#pragma once

#include "oracle.hpp"
#include "rdcov/data.hpp"
#include "rdcov/estimators.hpp"

#include <Eigen/Dense>

#include <random>

namespace testing {

inline oracle::Vec to_vec(const Eigen::VectorXd& v)
{
  return oracle::Vec(v.data(), v.data() + v.size());
}

inline oracle::Mat to_mat(const Eigen::MatrixXd& m)
{
  oracle::Mat out(static_cast<std::size_t>(m.rows()), oracle::Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out[i][j] = m(i, j);
  return out;
}

inline oracle::Kind to_oracle(rdcov::EstimatorKind k)
{
  return static_cast<oracle::Kind>(static_cast<int>(k));
}

inline oracle::K to_oracle(rdcov::KernelKind k)
{
  return static_cast<oracle::K>(static_cast<int>(k));
}

//! Smooth noisy RD data with `d` covariates on x ~ U(-1, 1).
inline rdcov::Dataset random_dataset(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double jump = 0.3)
{
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::VectorXd x(n), y(n);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = unif(rng);
    const double t = x[i] >= 0 ? 1.0 : 0.0;
    double yi = 0.5 + jump * t + 0.8 * x[i] - 0.6 * x[i] * x[i] + 0.3 * norm(rng);
    for (Eigen::Index k = 0; k < d; ++k) {
      z(i, k) = 0.2 * k + 0.5 * x[i] + norm(rng);
      yi += 0.4 * z(i, k);
    }
    y[i] = yi;
  }
  return rdcov::Dataset(y, x, z);
}

inline rdcov::LocalFitSpec spec(double h, int p = 1, rdcov::KernelKind k = rdcov::KernelKind::triangular)
{
  rdcov::LocalFitSpec s;
  s.kernel.kind = k;
  s.p = p;
  s.h = h;
  return s;
}

} // namespace testing
