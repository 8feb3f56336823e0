#pragma once

#include "rdcov/data.hpp"
#include "rdcov/locfit.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace rdcov {

//! The six sharp RD point estimators. Each is the coefficient on T in a
//! pooled kernel-weighted regression on [1, T, x, Tx, ...] plus:
enum class EstimatorKind
{
  standard,                  //!< nothing
  covadj,                    //!< Z
  interacted,                //!< (1-T)Z, TZ
  demeaned_common,           //!< Z - Zbar
  demeaned_common_interacted,//!< (1-T)(Z - Zbar), T(Z - Zbar)
  demeaned_group_interacted  //!< (1-T)(Z - Zbar_-), T(Z - Zbar_+)
};

inline constexpr EstimatorKind kAllEstimatorKinds[] = {
  EstimatorKind::standard,        EstimatorKind::covadj,
  EstimatorKind::interacted,      EstimatorKind::demeaned_common,
  EstimatorKind::demeaned_common_interacted, EstimatorKind::demeaned_group_interacted,
};

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& name);
//! True for kinds the CLI labels as diagnostic only (the demeaned ones).
bool is_diagnostic_kind(EstimatorKind kind);

struct PointEstimate
{
  double tau = 0.0;
  //! Covariate coefficients: d entries for covadj/demeaned_common, 2d
  //! (left block then right block) for the interacted kinds, empty otherwise.
  Eigen::VectorXd gamma;
  //! Standard RD effect on each covariate at the same h and kernel.
  Eigen::VectorXd tau_z;
  //! (1, -gamma') for covadj and demeaned_common, so that
  //! s_hat' (tau_hat, tau_z')' = tau. (1) for standard; empty otherwise.
  Eigen::VectorXd s_hat;
  //! Full coefficient vector of the realized regression.
  Eigen::VectorXd coef;
  EstimatorKind kind = EstimatorKind::standard;
  LocalFitSpec spec;
  Eigen::Index effective_left = 0;
  Eigen::Index effective_right = 0;
  //! Set when a covariate kind fell back to standard because d = 0.
  std::string notice;
};

//! Extra regressor block realizing `kind` at bandwidth spec.h. Sample means
//! use unweighted averages over |x| <= h (left: x < 0, right: x >= 0).
Eigen::MatrixXd covariate_block(const Dataset& data, EstimatorKind kind, const LocalFitSpec& spec);

//! Throws OneSidedError, InsufficientDataError, RankDeficientError.
PointEstimate estimate(const Dataset& data, EstimatorKind kind, const LocalFitSpec& spec);

//! Standard estimator applied to each covariate column as outcome.
Eigen::VectorXd covariate_rd_effects(const Dataset& data, const LocalFitSpec& spec);

} // namespace rdcov
