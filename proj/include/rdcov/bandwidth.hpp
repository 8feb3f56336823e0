#pragma once

#include "rdcov/data.hpp"
#include "rdcov/estimators.hpp"
#include "rdcov/inference.hpp"
#include "rdcov/locfit.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace rdcov {

enum class BandwidthRule
{
  mse_covadj,
  mse_standard,
  cer_covadj,
  cer_standard,
  manual
};

std::string to_string(BandwidthRule rule);

//! [(V/n) / (2(p+1) B^2)]^{1/(2p+3)}, the minimizer of h^{2(p+1)} B^2 + V/(nh).
//! Throws DomainError for B = 0, V <= 0 or n < 1.
double mse_bandwidth(double bias_constant, double variance_constant, long n, int p);

//! Shrink factor n^{-p/((3+2p)(3+p))}; n^{-1/20} for p = 1.
double cer_factor(long n, int p);
double cer_bandwidth(double h_mse, long n, int p);

//! Intermediate quantities of the plug-in selector, kept for auditing.
struct PilotTrace
{
  double sigma_x = 0.0;
  double v = 0.0;             //!< normal-reference pilot
  double global_left = 0.0;   //!< bandwidth of the global order-(p+2) fits
  double global_right = 0.0;
  double deriv_high_left = 0.0;  //!< estimated (p+2)-th derivatives
  double deriv_high_right = 0.0;
  double bias_b = 0.0;        //!< bias constant for the derivative estimand
  double variance_b = 0.0;
  double b_mse = 0.0;
  double deriv_left = 0.0;    //!< (p+1)-th derivatives estimated at b
  double deriv_right = 0.0;
  double bias_h = 0.0;        //!< B in mse_bandwidth
  double variance_h = 0.0;    //!< V in mse_bandwidth
  double h_mse = 0.0;
  double cer_factor = 1.0;
  bool regularized_b = false;
  bool regularized_h = false;
  std::string cer_note;
};

struct BandwidthSelection
{
  double h = 0.0;
  double b = 0.0;
  BandwidthRule rule = BandwidthRule::mse_covadj;
  PilotTrace pilot;
  std::vector<std::string> notices;
};

struct SelectOptions
{
  //! Normal-reference constant: v = c0 * sd(x) * n^{-1/5}.
  double c0 = 2.576 / std::sqrt(5.0);
  //! Report b = h instead of the separately selected b.
  bool b_equals_h = false;
  //! Coverage-error-optimal rather than MSE-optimal bandwidths.
  bool cer = false;
  //! Regularize when B^2 < eps * sqrt(V/n).
  double regularization_eps = 1e-8;
  VarianceOptions vce;
};

//! Three-stage plug-in selector for the standard or covadj estimator:
//! a normal-reference pilot v; b targeting the (p+1)-th derivative with
//! bias from global order-(p+2) fits; h from the order-p bias at b and the
//! variance at v. Deterministic. Throws ConfigError for other kinds.
BandwidthSelection select_bandwidth(const Dataset& data,
                                    EstimatorKind kind,
                                    Kernel kernel,
                                    int p,
                                    const SelectOptions& opts = {});

//! Smallest bandwidth giving at least `k` distinct scores with positive
//! kernel weight on each side.
double min_bandwidth(const Dataset& data, Kernel kernel, int k);

} // namespace rdcov
