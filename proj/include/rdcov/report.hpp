#pragma once

#include "rdcov/bandwidth.hpp"
#include "rdcov/data.hpp"
#include "rdcov/inference.hpp"
#include "rdcov/plim_check.hpp"
#include "rdcov/simulate.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rdcov {

//! One column of the main results table.
struct ResultColumn
{
  std::string label;
  EstimatorKind kind = EstimatorKind::standard;
  double h = 0.0;
  double b = 0.0;
  //! Robust inference with separately chosen b, and with b = h.
  InferenceResult separate;
  InferenceResult equal;
  //! 100 (length / benchmark length - 1); empty for the benchmark itself.
  std::optional<double> ci_change_separate;
  std::optional<double> ci_change_equal;
  std::vector<std::string> notices;
};

struct ResultTable
{
  std::vector<ResultColumn> columns;
  std::string bwselect;
  std::string vce;
  std::string kernel;
  int p = 1;
  double level = 0.95;
  DiagnosticsReport diagnostics;
  //! Point estimates of extra (diagnostic) estimators at the adjusted h.
  std::vector<std::pair<EstimatorKind, double>> extra_estimates;
  std::vector<std::string> notices;
};

using Json = nlohmann::ordered_json;

Json to_json(const InferenceResult& r);
Json to_json(const DiagnosticsReport& d);
Json to_json(const BandwidthSelection& s);
Json to_json(const ResultTable& t);
Json to_json(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names);
Json to_json(const StudyReport& s);
Json to_json(const PlimReport& r);

//! Aligned text renderings. Every number shown comes from the JSON form.
std::string format_table(const ResultTable& t);
std::string format_table(const BandwidthSelection& s);
std::string format_table(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names);
std::string format_table(const StudyReport& s);
std::string format_table(const PlimReport& r);

//! CSV renderings (round-trip precision).
std::string format_csv(const ResultTable& t);
std::string format_csv(const BandwidthSelection& s);
std::string format_csv(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names);
std::string format_csv(const StudyReport& s);

} // namespace rdcov
