#pragma once

#include "rdcov/data.hpp"
#include "rdcov/inference.hpp"
#include "rdcov/locfit.hpp"

#include <Eigen/Dense>

namespace rdcov::detail {

struct ProxyOptions
{
  VarianceMethod method = VarianceMethod::nn;
  int nn_neighbors = 3;
  Kernel kernel;
  //! Polynomial order and bandwidth of the per-side fits whose residuals
  //! serve as plug-in proxies (ignored for NN).
  int fit_order = 2;
  double fit_bandwidth = 1.0;
  //! Units with |x| <= window get proxies; everything else is zero.
  double window = 1.0;
};

//! n x (1 + d) residual proxies for the columns (y, Z). HC2/HC3 leverage
//! adjustments are already applied; HC1 is a scalar factor applied later.
Eigen::MatrixXd residual_proxies(const Dataset& data, const ProxyOptions& opts);

//! Indices of the J nearest same-side neighbors of each unit in `pool`
//! (sorted by score, ties by ascending index). Exposed for tests.
std::vector<std::vector<Eigen::Index>> nearest_neighbors(const Eigen::VectorXd& x,
                                                         const std::vector<Eigen::Index>& pool,
                                                         int neighbors);

//! Var of w' (Y - Z gamma) given proxies: sum_i w_i^2 (s'e_i)^2 or its
//! cluster analogue, with the HC1 / cluster small-sample factors.
double assemble_variance(const Dataset& data,
                         const Eigen::VectorXd& w,
                         const Eigen::VectorXd& s,
                         const Eigen::MatrixXd& proxies,
                         const VarianceOptions& opts,
                         int n_params);

} // namespace rdcov::detail
