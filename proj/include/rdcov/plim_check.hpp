#pragma once

#include "rdcov/estimators.hpp"
#include "rdcov/locfit.hpp"
#include "rdcov/simulate.hpp"

#include <vector>

namespace rdcov {

struct PlimOptions
{
  //! h = h_scale * n^{-1/5}.
  double h_scale = 1.0;
  Kernel kernel;
  int p = 1;
  int workers = 1;
};

struct PlimRow
{
  EstimatorKind kind = EstimatorKind::standard;
  Eigen::Index n = 0;
  double h = 0.0;
  int reps = 0;
  int failures = 0;
  double mean = 0.0;
  //! Monte Carlo standard error of `mean`.
  double mc_se = 0.0;
  double limit = 0.0;
  //! (mean - limit) / mc_se.
  double z = 0.0;
};

struct PlimReport
{
  std::vector<PlimRow> rows;
};

//! Averages each estimator over `reps` draws at every n in `n_grid` and
//! compares with its analytic probability limit. Never throws for
//! per-replication numerical failures; those are counted.
PlimReport plim_check(const DgpSpec& dgp,
                      const std::vector<EstimatorKind>& kinds,
                      const std::vector<Eigen::Index>& n_grid,
                      int reps,
                      const PlimOptions& opts = {});

} // namespace rdcov
