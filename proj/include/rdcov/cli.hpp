#pragma once

#include "rdcov/estimators.hpp"
#include "rdcov/inference.hpp"
#include "rdcov/locfit.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rdcov {

enum class Subcommand
{
  estimate,
  bandwidth,
  placebo,
  simulate
};

enum class OutputFormat
{
  table,
  json,
  csv
};

struct RunConfig
{
  Subcommand subcommand = Subcommand::estimate;
  std::string data;
  std::string outcome;
  std::string score;
  std::vector<std::string> covariates;
  std::optional<std::string> cluster;
  double cutoff = 0.0;
  Kernel kernel;
  int p = 1;
  std::optional<double> h;
  std::optional<double> b;
  //! "mserd" or "cerrd"; unset means mserd unless h is given.
  std::optional<std::string> bwselect;
  bool b_equals_h = false;
  VarianceOptions vce;
  double level = 0.95;
  OutputFormat format = OutputFormat::table;
  std::optional<std::uint64_t> seed;
  //! Extra point estimators reported by `estimate` (e.g. the demeaned kinds).
  std::vector<EstimatorKind> extra_estimators;

  // simulate
  std::optional<std::string> dgp_path;
  int model = 2;
  Eigen::Index n = 1000;
  int reps = 100;
  int workers = 1;
  std::vector<EstimatorKind> methods{EstimatorKind::standard, EstimatorKind::covadj};
};

struct RunResult
{
  int exit_code = 0;
  std::string output;
  //! Machine-readable error: {"error": code, "message": text}.
  std::string error;
};

//! Exit codes: 0 ok, 2 configuration, 3 numerical.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

//! Never throws; failures are reported through RunResult.
RunResult run(const RunConfig& config);

//! Parses command-line arguments and runs. Writes the report to `out` and
//! errors to `err`; returns the exit code.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace rdcov
