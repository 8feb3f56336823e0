#pragma once

#include "rdcov/data.hpp"
#include "rdcov/estimators.hpp"
#include "rdcov/locfit.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rdcov {

enum class VarianceMethod
{
  nn,
  hc0,
  hc1,
  hc2,
  hc3,
  cluster
};

std::string to_string(VarianceMethod m);
VarianceMethod parse_variance_method(const std::string& name);

struct VarianceOptions
{
  VarianceMethod method = VarianceMethod::nn;
  //! Same-side neighbors for the NN proxy.
  int nn_neighbors = 3;
  //! Multiply the cluster variance by G / (G - 1).
  bool cluster_dof = false;
};

//! Estimated leading bias of the order-p fit at bandwidth h.
//!
//! Per side, bias = [sum_i w_i (x_i/h)^{p+1} / (p+1)!] * m^{(p+1)}(0) where w
//! are the intercept weights at h and the derivative comes from an order
//! q = p+1 fit at bandwidth b applied to the linearized outcome y - Z gamma.
struct BiasEstimate
{
  double b_tilde = 0.0; //!< right - left
  double b = 0.0;
  int q = 2;
  double right = 0.0;
  double left = 0.0;
  double deriv_right = 0.0; //!< estimated (p+1)-th derivative, right side
  double deriv_left = 0.0;
  double design_right = 0.0; //!< sum_i w_i (x_i/h)^{p+1} / (p+1)!
  double design_left = 0.0;
};

//! tau_bc = tau - h^{p+1} B with every piece written as weights on the rows
//! of the linearized outcome y - Z gamma (gamma frozen from the point fit).
struct BiasCorrection
{
  double tau = 0.0;
  double tau_bc = 0.0;
  Eigen::VectorXd gamma;
  Eigen::VectorXd s_hat;
  //! Intercept weights at h, right minus left.
  LinearWeights conventional;
  //! Bias-corrected weights P_+ - P_-.
  LinearWeights corrected;
  BiasEstimate bias;
  EstimatorKind kind = EstimatorKind::covadj;
  LocalFitSpec spec;
  Eigen::Index effective_left = 0;
  Eigen::Index effective_right = 0;
  std::string notice;

  //! Applies the corrected weights to (y, Z) rows: w'y - (w'Z) gamma.
  double recompute(const Dataset& data) const;
};

struct VarianceEstimate
{
  //! Scaled variance: Var(tau_bc) = v_bc / (n h).
  double v_bc = 0.0;
  //! Var(tau_bc) itself.
  double variance = 0.0;
  VarianceMethod method = VarianceMethod::nn;
  int nn_neighbors = 3;
  int n_clusters = 0;
  std::string df_note;
};

struct InferenceResult
{
  double tau = 0.0; //!< conventional point estimate at h
  double tau_bc = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  double t_stat = 0.0;
  double level = 0.95;
  double tau0 = 0.0;
  double v_bc = 0.0;
  double h = 0.0;
  double b = 0.0;
  Eigen::Index effective_left = 0;
  Eigen::Index effective_right = 0;
  BiasEstimate bias;
  VarianceEstimate variance;
  EstimatorKind kind = EstimatorKind::covadj;
  std::vector<std::string> warnings;

  double ci_length() const { return ci_high - ci_low; }
};

//! Only EstimatorKind::standard and EstimatorKind::covadj have a robust
//! inference path; covadj with d = 0 falls back to standard.
BiasEstimate bias_estimate(const Dataset& data,
                           const LocalFitSpec& spec,
                           double b,
                           EstimatorKind kind = EstimatorKind::covadj);

BiasCorrection bias_corrected_estimate(const Dataset& data,
                                       EstimatorKind kind,
                                       const LocalFitSpec& spec,
                                       double b);

VarianceEstimate variance_bc(const Dataset& data,
                             const BiasCorrection& bc,
                             const VarianceOptions& opts);

VarianceEstimate variance_bc(const Dataset& data,
                             const LocalFitSpec& spec,
                             double b,
                             const VarianceOptions& opts,
                             EstimatorKind kind = EstimatorKind::covadj);

//! tau_bc +- z_{1-(1-level)/2} sqrt(v_bc / nh); two-sided normal p-value for
//! tau = tau0. Throws DegenerateError if v_bc <= 0.
InferenceResult make_interval(double tau_bc, double v_bc, double nh, double level, double tau0 = 0.0);

InferenceResult robust_ci(const Dataset& data,
                          const LocalFitSpec& spec,
                          double b,
                          const VarianceOptions& opts,
                          double level = 0.95,
                          EstimatorKind kind = EstimatorKind::covadj,
                          double tau0 = 0.0);

struct PlaceboSpec
{
  LocalFitSpec spec;
  double b = 0.0;
};

struct PlaceboRow
{
  Eigen::Index covariate = 0;
  InferenceResult result;
};

//! Runs the no-covariate robust pipeline with each covariate as outcome.
//! `specs` holds one entry per covariate.
std::vector<PlaceboRow> placebo_tests(const Dataset& data,
                                      const std::vector<PlaceboSpec>& specs,
                                      const VarianceOptions& opts,
                                      double level = 0.95);

//! Ratio of the covariate-adjusted to the unadjusted bias-corrected
//! variance at common h and b. Throws DegenerateError on a zero denominator.
double efficiency_ratio(const Dataset& data,
                        const LocalFitSpec& spec,
                        double b,
                        const VarianceOptions& opts);

} // namespace rdcov
