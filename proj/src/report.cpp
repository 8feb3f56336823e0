#include "rdcov/report.hpp"

#include <cstdio>
#include <sstream>

namespace rdcov {

namespace {

std::string fmt(const Json& v, int digits = 4)
{
  if (v.is_null())
    return "-";
  if (v.is_number_integer() || v.is_number_unsigned())
    return v.dump();
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v.get<double>());
    return buf;
  }
  if (v.is_string())
    return v.get<std::string>();
  return v.dump();
}

std::string interval(const Json& lo, const Json& hi)
{
  return "[" + fmt(lo) + ", " + fmt(hi) + "]";
}

// Full-precision scalar for CSV cells.
std::string cell(const Json& v)
{
  if (v.is_null())
    return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos)
      return s;
    std::string q = "\"";
    for (char c : s)
      q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

// Rows of label + one cell per column, padded to a common width.
std::string render(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows)
{
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t j = 0; j < header.size(); ++j)
    width[j] = header[j].size();
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size() && j < width.size(); ++j)
      width[j] = std::max(width[j], r[j].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      const std::string& s = j < r.size() ? r[j] : std::string();
      if (j == 0)
        out << s << std::string(width[j] - s.size(), ' ');
      else
        out << "  " << std::string(width[j] - s.size(), ' ') << s;
    }
    out << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width)
    total += w + 2;
  out << std::string(total - 2, '-') << '\n';
  for (const auto& r : rows)
    line(r);
  return out.str();
}

Json optional_number(const std::optional<double>& v)
{
  return v ? Json(*v) : Json(nullptr);
}

} // namespace

Json to_json(const InferenceResult& r)
{
  Json j;
  j["estimator"] = to_string(r.kind);
  j["point_estimate"] = r.tau;
  j["bias_corrected"] = r.tau_bc;
  j["se"] = r.se;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["ci_length"] = r.ci_length();
  j["p_value"] = r.p_value;
  j["t_stat"] = r.t_stat;
  j["level"] = r.level;
  j["tau0"] = r.tau0;
  j["h"] = r.h;
  j["b"] = r.b;
  j["n_left"] = r.effective_left;
  j["n_right"] = r.effective_right;
  j["v_bc"] = r.v_bc;
  j["vce"] = to_string(r.variance.method);
  if (r.variance.method == VarianceMethod::nn)
    j["nn_neighbors"] = r.variance.nn_neighbors;
  if (r.variance.method == VarianceMethod::cluster)
    j["n_clusters"] = r.variance.n_clusters;
  if (!r.variance.df_note.empty())
    j["df_note"] = r.variance.df_note;
  j["bias"] = {{"estimate", r.bias.b_tilde},
               {"q", r.bias.q},
               {"left", r.bias.left},
               {"right", r.bias.right},
               {"deriv_left", r.bias.deriv_left},
               {"deriv_right", r.bias.deriv_right}};
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const DiagnosticsReport& d)
{
  Json j;
  j["n"] = d.n;
  j["n_left"] = d.n_left;
  j["n_right"] = d.n_right;
  j["covariates"] = d.d;
  j["covariate_rank"] = d.covariate_rank;
  j["x_min"] = d.x_min;
  j["x_max"] = d.x_max;
  j["near_cutoff_left"] = d.near_left;
  j["near_cutoff_right"] = d.near_right;
  j["dropped_rows"] = d.dropped_rows;
  j["warnings"] = d.warnings;
  return j;
}

Json to_json(const BandwidthSelection& s)
{
  const auto& t = s.pilot;
  Json j;
  j["h"] = s.h;
  j["b"] = s.b;
  j["rule"] = to_string(s.rule);
  j["pilot"] = {{"sigma_x", t.sigma_x},
                {"v", t.v},
                {"global_left", t.global_left},
                {"global_right", t.global_right},
                {"deriv_high_left", t.deriv_high_left},
                {"deriv_high_right", t.deriv_high_right},
                {"bias_b", t.bias_b},
                {"variance_b", t.variance_b},
                {"b_mse", t.b_mse},
                {"deriv_left", t.deriv_left},
                {"deriv_right", t.deriv_right},
                {"bias_h", t.bias_h},
                {"variance_h", t.variance_h},
                {"h_mse", t.h_mse},
                {"cer_factor", t.cer_factor},
                {"regularized_b", t.regularized_b},
                {"regularized_h", t.regularized_h}};
  if (!t.cer_note.empty())
    j["pilot"]["cer_note"] = t.cer_note;
  j["notices"] = s.notices;
  return j;
}

Json to_json(const ResultTable& t)
{
  Json j;
  j["kernel"] = t.kernel;
  j["p"] = t.p;
  j["bwselect"] = t.bwselect;
  j["vce"] = t.vce;
  j["level"] = t.level;
  j["columns"] = Json::array();
  for (const auto& c : t.columns) {
    Json col;
    col["label"] = c.label;
    col["estimator"] = to_string(c.kind);
    col["point_estimate"] = c.separate.tau;
    col["separate_b"] = {{"ci_low", c.separate.ci_low},
                         {"ci_high", c.separate.ci_high},
                         {"ci_length", c.separate.ci_length()},
                         {"ci_length_change_pct", optional_number(c.ci_change_separate)},
                         {"p_value", c.separate.p_value},
                         {"bias_corrected", c.separate.tau_bc},
                         {"se", c.separate.se}};
    col["b_equals_h"] = {{"ci_low", c.equal.ci_low},
                         {"ci_high", c.equal.ci_high},
                         {"ci_length", c.equal.ci_length()},
                         {"ci_length_change_pct", optional_number(c.ci_change_equal)},
                         {"p_value", c.equal.p_value},
                         {"bias_corrected", c.equal.tau_bc},
                         {"se", c.equal.se}};
    col["h"] = c.h;
    col["b"] = c.b;
    col["n_left"] = c.separate.effective_left;
    col["n_right"] = c.separate.effective_right;
    col["notices"] = c.notices;
    j["columns"].push_back(col);
  }
  if (!t.extra_estimates.empty()) {
    j["diagnostic_estimators"] = Json::array();
    for (const auto& [kind, tau] : t.extra_estimates)
      j["diagnostic_estimators"].push_back(
        {{"estimator", to_string(kind)},
         {"point_estimate", tau},
         {"note", is_diagnostic_kind(kind) ? "diagnostic - not recommended" : ""}});
  }
  j["diagnostics"] = to_json(t.diagnostics);
  j["notices"] = t.notices;
  return j;
}

Json to_json(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names)
{
  Json j = Json::array();
  for (const auto& r : rows) {
    Json row = to_json(r.result);
    const auto k = static_cast<std::size_t>(r.covariate);
    row["covariate"] = k < names.size() ? names[k] : "z" + std::to_string(k + 1);
    j.push_back(row);
  }
  return j;
}

Json to_json(const StudyReport& s)
{
  Json j;
  j["dgp"] = s.dgp;
  j["seed"] = s.seed;
  j["n"] = s.n;
  j["reps"] = s.reps;
  j["bwselect"] = s.bandwidth_rule;
  j["vce"] = s.vce;
  j["methods"] = Json::array();
  for (const auto& m : s.methods)
    j["methods"].push_back({{"estimator", to_string(m.kind)},
                            {"successes", m.successes},
                            {"failures", m.failures},
                            {"failure_rate", m.failure_rate},
                            {"target", m.target},
                            {"mean_estimate", m.mean_estimate},
                            {"bias", m.bias},
                            {"variance", m.variance},
                            {"mse", m.mse},
                            {"mean_bias_corrected", m.mean_bc},
                            {"coverage", m.coverage},
                            {"mean_ci_length", m.mean_ci_length},
                            {"mean_h", m.mean_h},
                            {"median_h", m.median_h},
                            {"mean_b", m.mean_b},
                            {"median_b", m.median_b}});
  return j;
}

Json to_json(const PlimReport& r)
{
  Json j = Json::array();
  for (const auto& row : r.rows)
    j.push_back({{"estimator", to_string(row.kind)},
                 {"n", row.n},
                 {"h", row.h},
                 {"reps", row.reps},
                 {"failures", row.failures},
                 {"mean", row.mean},
                 {"mc_se", row.mc_se},
                 {"limit", row.limit},
                 {"z", row.z}});
  return j;
}

// ---------------------------------------------------------------------------
// Text tables

std::string format_table(const ResultTable& t)
{
  const Json j = to_json(t);
  std::vector<std::string> header{""};
  for (const auto& c : j["columns"])
    header.push_back(c["label"].get<std::string>());
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& label, auto&& get) {
    std::vector<std::string> r{label};
    for (const auto& c : j["columns"])
      r.push_back(get(c));
    rows.push_back(std::move(r));
  };
  add("Point estimate", [](const Json& c) { return fmt(c["point_estimate"]); });
  for (const char* block : {"separate_b", "b_equals_h"}) {
    const std::string tag = std::string(block) == "separate_b" ? "" : " (b = h)";
    add("Robust 95% CI" + tag,
        [&](const Json& c) { return interval(c[block]["ci_low"], c[block]["ci_high"]); });
    add("CI length change (%)" + tag,
        [&](const Json& c) { return fmt(c[block]["ci_length_change_pct"], 2); });
    add("p-value" + tag, [&](const Json& c) { return fmt(c[block]["p_value"]); });
  }
  add("h", [](const Json& c) { return fmt(c["h"]); });
  add("b", [](const Json& c) { return fmt(c["b"]); });
  add("N left | right", [](const Json& c) { return fmt(c["n_left"]) + " | " + fmt(c["n_right"]); });

  std::ostringstream out;
  out << render(header, rows);
  out << "kernel=" << j["kernel"].get<std::string>() << " p=" << j["p"].dump()
      << " bwselect=" << j["bwselect"].get<std::string>() << " vce=" << j["vce"].get<std::string>()
      << '\n';
  if (j.contains("diagnostic_estimators"))
    for (const auto& e : j["diagnostic_estimators"]) {
      out << e["estimator"].get<std::string>() << ": " << fmt(e["point_estimate"]);
      const auto note = e["note"].get<std::string>();
      if (!note.empty())
        out << "  (" << note << ")";
      out << '\n';
    }
  for (const auto& c : j["columns"])
    for (const auto& note : c["notices"])
      out << "note [" << c["label"].get<std::string>() << "]: " << note.get<std::string>() << '\n';
  for (const auto& w : j["diagnostics"]["warnings"])
    out << "warning: " << w.get<std::string>() << '\n';
  for (const auto& note : j["notices"])
    out << "note: " << note.get<std::string>() << '\n';
  return out.str();
}

std::string format_table(const BandwidthSelection& s)
{
  const Json j = to_json(s);
  std::vector<std::vector<std::string>> rows{
    {"h", fmt(j["h"], 6)}, {"b", fmt(j["b"], 6)}, {"rule", j["rule"].get<std::string>()}};
  for (const auto& [key, value] : j["pilot"].items())
    rows.push_back({"pilot." + key, value.is_number_float() ? fmt(value, 6) : fmt(value)});
  std::ostringstream out;
  out << render({"quantity", "value"}, rows);
  for (const auto& note : j["notices"])
    out << "note: " << note.get<std::string>() << '\n';
  return out.str();
}

std::string format_table(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names)
{
  const Json j = to_json(rows, names);
  std::vector<std::vector<std::string>> out_rows;
  for (const auto& r : j)
    out_rows.push_back({r["covariate"].get<std::string>(),
                        fmt(r["point_estimate"]),
                        interval(r["ci_low"], r["ci_high"]),
                        fmt(r["p_value"]),
                        fmt(r["h"]),
                        fmt(r["b"]),
                        fmt(r["n_left"]) + " | " + fmt(r["n_right"])});
  return render({"covariate", "estimate", "robust 95% CI", "p-value", "h", "b", "N left | right"},
                out_rows);
}

std::string format_table(const StudyReport& s)
{
  const Json j = to_json(s);
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : j["methods"])
    rows.push_back({m["estimator"].get<std::string>(),
                    fmt(m["bias"], 5),
                    fmt(m["variance"], 6),
                    fmt(m["mse"], 6),
                    fmt(m["coverage"], 3),
                    fmt(m["mean_ci_length"], 5),
                    fmt(m["median_h"], 4),
                    fmt(m["median_b"], 4),
                    fmt(m["failure_rate"], 3)});
  std::ostringstream out;
  out << "dgp=" << j["dgp"].get<std::string>() << " seed=" << j["seed"].dump()
      << " n=" << j["n"].dump() << " reps=" << j["reps"].dump()
      << " bwselect=" << j["bwselect"].get<std::string>() << " vce=" << j["vce"].get<std::string>()
      << '\n';
  out << render({"estimator", "bias", "variance", "mse", "coverage", "ci length", "median h",
                 "median b", "fail rate"},
                rows);
  return out.str();
}

std::string format_table(const PlimReport& r)
{
  const Json j = to_json(r);
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : j)
    rows.push_back({row["estimator"].get<std::string>(),
                    fmt(row["n"]),
                    fmt(row["h"]),
                    fmt(row["mean"], 5),
                    fmt(row["mc_se"], 5),
                    fmt(row["limit"], 5),
                    fmt(row["z"], 2)});
  return render({"estimator", "n", "h", "mean", "mc se", "limit", "z"}, rows);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_csv(const ResultTable& t)
{
  const Json j = to_json(t);
  std::ostringstream out;
  out << "row";
  for (const auto& c : j["columns"])
    out << ',' << cell(c["label"]);
  out << '\n';
  auto add = [&](const std::string& label, auto&& get) {
    out << cell(label);
    for (const auto& c : j["columns"])
      out << ',' << cell(get(c));
    out << '\n';
  };
  add("point_estimate", [](const Json& c) { return c["point_estimate"]; });
  for (const char* block : {"separate_b", "b_equals_h"}) {
    const std::string suffix = std::string(block) == "separate_b" ? "" : "_b_equals_h";
    for (const char* key : {"ci_low", "ci_high", "ci_length_change_pct", "p_value"})
      add(std::string(key) + suffix, [&](const Json& c) { return c[block][key]; });
  }
  for (const char* key : {"h", "b", "n_left", "n_right"})
    add(key, [&](const Json& c) { return c[key]; });
  return out.str();
}

std::string format_csv(const BandwidthSelection& s)
{
  const Json j = to_json(s);
  std::ostringstream out;
  out << "quantity,value\n";
  out << "h," << cell(j["h"]) << "\nb," << cell(j["b"]) << "\nrule," << cell(j["rule"]) << '\n';
  for (const auto& [key, value] : j["pilot"].items())
    out << "pilot." << key << ',' << cell(value) << '\n';
  return out.str();
}

std::string format_csv(const std::vector<PlaceboRow>& rows, const std::vector<std::string>& names)
{
  const Json j = to_json(rows, names);
  std::ostringstream out;
  const char* keys[] = {"point_estimate", "bias_corrected", "se", "ci_low", "ci_high",
                        "p_value", "h", "b", "n_left", "n_right"};
  out << "covariate";
  for (const char* k : keys)
    out << ',' << k;
  out << '\n';
  for (const auto& r : j) {
    out << cell(r["covariate"]);
    for (const char* k : keys)
      out << ',' << cell(r[k]);
    out << '\n';
  }
  return out.str();
}

std::string format_csv(const StudyReport& s)
{
  const Json j = to_json(s);
  std::ostringstream out;
  bool first = true;
  for (const auto& m : j["methods"]) {
    if (first) {
      out << "dgp,seed,n,reps";
      for (const auto& [key, value] : m.items())
        out << ',' << key;
      out << '\n';
      first = false;
    }
    out << cell(j["dgp"]) << ',' << cell(j["seed"]) << ',' << cell(j["n"]) << ',' << cell(j["reps"]);
    for (const auto& [key, value] : m.items())
      out << ',' << cell(value);
    out << '\n';
  }
  return out.str();
}

} // namespace rdcov
