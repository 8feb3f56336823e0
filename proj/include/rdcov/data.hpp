#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace rdcov {

//! Column names to pull out of a CSV file.
struct CsvSchema
{
  std::string outcome;
  std::string score;
  std::vector<std::string> covariates;
  std::optional<std::string> cluster;
};

//! A sharp RD sample with the score centered at the cutoff.
//!
//! Immutable after construction. Treatment is derived from the sign of the
//! centered score (x >= 0 is treated) and is never stored.
class Dataset
{
public:
  //! Validates shapes and finiteness; throws ConfigError/EmptyDataError.
  //! `x` must already be centered; `cutoff` records the original threshold.
  Dataset(Eigen::VectorXd y,
          Eigen::VectorXd x,
          Eigen::MatrixXd z,
          std::optional<std::vector<int>> cluster = std::nullopt,
          double cutoff = 0.0);

  //! Convenience for data without covariates.
  Dataset(Eigen::VectorXd y, Eigen::VectorXd x);

  Eigen::Index n() const { return y_.size(); }
  Eigen::Index d() const { return z_.cols(); }

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::MatrixXd& z() const { return z_; }
  const std::optional<std::vector<int>>& cluster() const { return cluster_; }
  double cutoff() const { return cutoff_; }

  bool treated(Eigen::Index i) const { return x_[i] >= 0.0; }
  Eigen::Index n_left() const { return n_left_; }
  Eigen::Index n_right() const { return n_right_; }
  bool one_sided() const { return n_left_ == 0 || n_right_ == 0; }
  //! Number of distinct cluster ids (0 when no clusters).
  int n_clusters() const { return n_clusters_; }

  //! Throws OneSidedError if either side is empty.
  void require_two_sided() const;

  //! Same data with the outcome replaced (used for placebo runs on covariates).
  Dataset with_outcome(Eigen::VectorXd y) const;
  //! Same data without covariates.
  Dataset without_covariates() const;
  //! Same data with every score multiplied by `c` (c > 0).
  Dataset with_scaled_score(double c) const;

  //! Number of rows dropped by listwise deletion when loaded from CSV.
  Eigen::Index dropped_rows() const { return dropped_; }
  void set_dropped_rows(Eigen::Index k) { dropped_ = k; }

private:
  Eigen::VectorXd y_;
  Eigen::VectorXd x_;
  Eigen::MatrixXd z_;
  std::optional<std::vector<int>> cluster_;
  double cutoff_ = 0.0;
  Eigen::Index n_left_ = 0;
  Eigen::Index n_right_ = 0;
  int n_clusters_ = 0;
  Eigen::Index dropped_ = 0;
};

//! Reads a CSV file with a header row. The score column is centered at
//! `cutoff`. Rows with a missing value (empty, NA, NaN, ".") in any used
//! column are dropped and counted. Cluster labels may be arbitrary strings;
//! they are mapped to dense integer ids in order of first appearance.
Dataset load_csv(const std::string& path, const CsvSchema& schema, double cutoff);

//! Parses CSV text (same rules as load_csv).
Dataset parse_csv(const std::string& text, const CsvSchema& schema, double cutoff);

//! Writes the dataset back out with the original (uncentered) score using
//! 17 significant digits. Column names come from `schema`; covariate names
//! default to z1..zd when the schema lists fewer names than columns.
void write_csv(const Dataset& data, const std::string& path, const CsvSchema& schema);
std::string to_csv(const Dataset& data, const CsvSchema& schema);

struct DiagnosticsReport
{
  Eigen::Index n = 0;
  Eigen::Index n_left = 0;
  Eigen::Index n_right = 0;
  Eigen::Index d = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  //! Rank of [1, Z] minus one; equals d when the covariates are usable.
  Eigen::Index covariate_rank = 0;
  //! Left/right counts among the 10% of observations closest to the cutoff.
  Eigen::Index near_left = 0;
  Eigen::Index near_right = 0;
  Eigen::Index dropped_rows = 0;
  std::vector<std::string> warnings;
};

//! Fewer observations than this on either side triggers a warning.
inline constexpr Eigen::Index kSmallSideThreshold = 10;
//! Count ratio near the cutoff above which a density-gap warning is issued.
inline constexpr double kDensityRatioThreshold = 4.0;

DiagnosticsReport validate(const Dataset& data);

} // namespace rdcov
