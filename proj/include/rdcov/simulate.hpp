#pragma once

#include "rdcov/bandwidth.hpp"
#include "rdcov/data.hpp"
#include "rdcov/estimators.hpp"
#include "rdcov/inference.hpp"
#include "rdcov/locfit.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rdcov {

//! Counter-based random stream keyed by (seed, replication, unit). Every
//! draw is a pure function of the key and a per-stream counter, so results
//! never depend on scheduling.
class CounterRng
{
public:
  CounterRng(std::uint64_t seed, std::uint64_t replication, std::uint64_t unit);
  //! Uniform on (0, 1).
  double uniform();
  //! Standard normal (Box-Muller, two uniforms per draw).
  double normal();

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

//! c0 + c1 x + c2 x^2 + ...
struct Polynomial
{
  std::vector<double> coef;

  double operator()(double x) const;
  //! k-th derivative at x.
  double derivative(int k, double x) const;
};

enum class ScoreDistribution
{
  beta_shifted, //!< 2 Beta(2, 4) - 1 on [-1, 1]
  uniform       //!< uniform on [-1, 1]
};

std::string to_string(ScoreDistribution s);

struct CovariateSpec
{
  Polynomial mean_minus;  //!< E[Z(0) | X = x]
  Polynomial mean_plus;   //!< E[Z(1) | X = x]
  double sd = 1.0;        //!< residual standard deviation (both sides)
  double loading_minus = 0.0; //!< coefficient of the Z residual in Y(0)
  double loading_plus = 0.0;  //!< coefficient of the Z residual in Y(1)
  double residual_corr = 0.0; //!< base correlation of Y and Z residuals
};

struct ClusterSpec
{
  int groups = 0;       //!< 0 disables clustering
  double effect_sd = 0.0; //!< sd of the cluster random effect added to Y
};

//! Data-generating process:
//!   Z = mu_Z(X) + e_Z,  Y = mu_Y(X) + loading' e_Z + u,
//! with e_Z ~ N(0, diag(sd^2)) and corr(u, e_Zk) = multiplier * residual_corr_k.
//! When covariate_relevant is false both loadings and residual correlations
//! are treated as zero. All population quantities are available in closed form.
struct DgpSpec
{
  std::string name = "custom";
  Polynomial mu_y_minus;
  Polynomial mu_y_plus;
  std::vector<CovariateSpec> covariates;
  double sd_y = 1.0;
  double residual_corr_multiplier = 1.0;
  bool covariate_relevant = true;
  ScoreDistribution score_dist = ScoreDistribution::beta_shifted;
  ClusterSpec cluster;
  std::uint64_t seed = 20180525;

  Eigen::Index d() const { return static_cast<Eigen::Index>(covariates.size()); }

  //! Throws ConfigError if the residual covariance is not positive definite
  //! or a field is out of range.
  void check() const;

  double tau() const;
  Eigen::VectorXd tau_z() const;
  Eigen::VectorXd mu_z_minus() const;
  Eigen::VectorXd mu_z_plus() const;
  //! V[Z | X = 0] (same on both sides).
  Eigen::MatrixXd sigma2_z() const;
  //! Cov(Z, Y | X = 0) on one side.
  Eigen::VectorXd cov_zy(Side side) const;
  Eigen::VectorXd gamma_y() const;
  Eigen::VectorXd gamma_y_minus() const;
  Eigen::VectorXd gamma_y_plus() const;
  //! V[(Y, Z')' | X = 0] on one side.
  Eigen::MatrixXd joint_covariance(Side side) const;
  //! Population efficiency ratio of the adjusted to the unadjusted estimator.
  double efficiency_ratio() const;
  //! Probability limit of each estimator as h -> 0, nh -> infinity.
  double probability_limit(EstimatorKind kind) const;
  //! Density of the score at the cutoff.
  double density_at_cutoff() const;

  //! Asymptotic constants of the MSE expansion for the standard or covadj
  //! estimator (the latter linearized with the population gamma_Y).
  struct MseConstants
  {
    double bias = 0.0;
    double variance = 0.0;
  };
  MseConstants mse_constants(EstimatorKind kind, Kernel kernel, int p) const;
  //! Infeasible MSE-optimal bandwidth from the population constants.
  double infeasible_bandwidth(EstimatorKind kind, Kernel kernel, int p, long n) const;
};

//! One dataset; deterministic in (dgp.seed, replication).
Dataset draw(const DgpSpec& dgp, Eigen::Index n, std::uint64_t replication);

//! Synthetic analogues of the four reference simulation models:
//! 1 irrelevant covariate, 2 baseline, 3 zero residual correlation,
//! 4 doubled residual correlation.
DgpSpec model_preset(int model);

//! DGP configuration as JSON (fields mirror DgpSpec).
DgpSpec dgp_from_json(const std::string& text);
std::string dgp_to_json(const DgpSpec& dgp);

//! Kernel moment integrals on [0, 1]: int k(u)^power u^m du.
double kernel_moment(Kernel kernel, int m, int power = 1);

struct StudyConfig
{
  Eigen::Index n = 1000;
  int reps = 100;
  std::vector<EstimatorKind> methods{EstimatorKind::standard, EstimatorKind::covadj};
  Kernel kernel;
  int p = 1;
  SelectOptions select;
  //! Fixed bandwidths bypass selection when set.
  std::optional<double> h;
  std::optional<double> b;
  double level = 0.95;
  int workers = 1;
};

struct MethodSummary
{
  EstimatorKind kind = EstimatorKind::standard;
  int successes = 0;
  int failures = 0;
  double failure_rate = 0.0;
  double target = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double mean_bc = 0.0;
  double coverage = 0.0;
  double mean_ci_length = 0.0;
  double mean_h = 0.0;
  double median_h = 0.0;
  double mean_b = 0.0;
  double median_b = 0.0;
};

struct StudyReport
{
  std::string dgp;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  int reps = 0;
  std::string bandwidth_rule;
  std::string vce;
  std::vector<MethodSummary> methods;
};

StudyReport run_study(const DgpSpec& dgp, const StudyConfig& config);

//! Runs `fn(rep)` for rep in [0, reps) on `workers` threads. Each call
//! must only write to its own slot; ordering of side effects is unspecified.
template<class Fn>
void parallel_for(int reps, int workers, Fn&& fn);

} // namespace rdcov

#include "rdcov/detail/parallel.hpp"
