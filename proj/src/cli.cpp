#include "rdcov/cli.hpp"

#include "rdcov/bandwidth.hpp"
#include "rdcov/data.hpp"
#include "rdcov/error.hpp"
#include "rdcov/report.hpp"
#include "rdcov/simulate.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace rdcov {

namespace {

void check_config(const RunConfig& c)
{
  if (c.h && c.bwselect)
    throw ConfigError("a manual --h cannot be combined with --bwselect");
  if (c.b && !c.h)
    throw ConfigError("--b requires --h (b is otherwise selected with h)");
  if (c.h && !(*c.h > 0.0))
    throw ConfigError("--h must be positive");
  if (c.b && !(*c.b > 0.0))
    throw ConfigError("--b must be positive");
  if (c.bwselect && *c.bwselect != "mserd" && *c.bwselect != "cerrd")
    throw ConfigError("--bwselect must be mserd or cerrd");
  if (!(c.level > 0.0 && c.level < 1.0))
    throw ConfigError("--level must lie in (0, 1)");
  if (c.p < 0 || c.p > kMaxOrder)
    throw ConfigError("--p must be in [0, " + std::to_string(kMaxOrder) + "]");
  if (c.vce.nn_neighbors < 1)
    throw ConfigError("--nn-neighbors must be at least 1");
  if (c.subcommand != Subcommand::simulate) {
    if (c.data.empty())
      throw ConfigError("--data is required");
    if (c.outcome.empty() || c.score.empty())
      throw ConfigError("--outcome and --score are required");
    if (c.vce.method == VarianceMethod::cluster && !c.cluster)
      throw ConfigError("--vce cluster requires --cluster");
  } else {
    if (c.reps < 1)
      throw ConfigError("--reps must be at least 1");
    if (c.n < 10)
      throw ConfigError("--n must be at least 10");
    if (c.workers < 1)
      throw ConfigError("--workers must be at least 1");
  }
  if (c.subcommand == Subcommand::bandwidth && c.h)
    throw ConfigError("the bandwidth subcommand selects h; --h is not allowed");
}

SelectOptions select_options(const RunConfig& c)
{
  SelectOptions s;
  s.cer = c.bwselect && *c.bwselect == "cerrd";
  s.b_equals_h = c.b_equals_h;
  s.vce = c.vce;
  return s;
}

std::string rule_name(const RunConfig& c)
{
  if (c.h)
    return "manual";
  return c.bwselect.value_or("mserd");
}

Dataset load(const RunConfig& c)
{
  CsvSchema schema;
  schema.outcome = c.outcome;
  schema.score = c.score;
  schema.covariates = c.covariates;
  schema.cluster = c.cluster;
  return load_csv(c.data, schema, c.cutoff);
}

LocalFitSpec make_spec(const RunConfig& c, double h)
{
  LocalFitSpec s;
  s.kernel = c.kernel;
  s.p = c.p;
  s.h = h;
  return s;
}

// Bandwidths for one estimator: manual or data-driven.
std::pair<double, double> bandwidths(const Dataset& data, EstimatorKind kind, const RunConfig& c,
                                     std::vector<std::string>& notices)
{
  if (c.h) {
    const double b = c.b_equals_h ? *c.h : c.b.value_or(*c.h);
    return {*c.h, b};
  }
  const auto sel = select_bandwidth(data, kind, c.kernel, c.p, select_options(c));
  notices.insert(notices.end(), sel.notices.begin(), sel.notices.end());
  return {sel.h, sel.b};
}

std::string render(const RunConfig& c, const Json& j, const std::string& table, const std::string& csv)
{
  switch (c.format) {
    case OutputFormat::json:
      return j.dump(2) + "\n";
    case OutputFormat::csv:
      return csv;
    case OutputFormat::table:
      return table;
  }
  return table;
}

std::string run_estimate(const RunConfig& c)
{
  const Dataset data = load(c);
  ResultTable t;
  t.diagnostics = validate(data);
  data.require_two_sided();
  t.kernel = to_string(c.kernel.kind);
  t.p = c.p;
  t.bwselect = rule_name(c);
  t.vce = to_string(c.vce.method);
  t.level = c.level;

  std::vector<std::pair<std::string, EstimatorKind>> plan{{"Unadjusted", EstimatorKind::standard}};
  if (data.d() > 0)
    plan.emplace_back("Adjusted", EstimatorKind::covadj);
  else
    t.notices.push_back("no covariates supplied: the covariate-adjusted estimator reduces to the "
                        "unadjusted one");

  for (const auto& [label, kind] : plan) {
    ResultColumn col;
    col.label = label;
    col.kind = kind;
    std::tie(col.h, col.b) = bandwidths(data, kind, c, col.notices);
    const auto spec = make_spec(c, col.h);
    col.separate = robust_ci(data, spec, col.b, c.vce, c.level, kind);
    col.equal = robust_ci(data, spec, col.h, c.vce, c.level, kind);
    for (const auto& w : col.separate.warnings)
      col.notices.push_back(w);
    t.columns.push_back(std::move(col));
  }
  if (t.columns.size() == 2) {
    const auto& base = t.columns[0];
    auto& adj = t.columns[1];
    adj.ci_change_separate = 100.0 * (adj.separate.ci_length() / base.separate.ci_length() - 1.0);
    adj.ci_change_equal = 100.0 * (adj.equal.ci_length() / base.equal.ci_length() - 1.0);
  }
  const double h_extra = t.columns.back().h;
  for (auto kind : c.extra_estimators)
    t.extra_estimates.emplace_back(kind, estimate(data, kind, make_spec(c, h_extra)).tau);

  return render(c, to_json(t), format_table(t), format_csv(t));
}

std::string run_bandwidth(const RunConfig& c)
{
  const Dataset data = load(c);
  const EstimatorKind kind = data.d() > 0 ? EstimatorKind::covadj : EstimatorKind::standard;
  const auto sel = select_bandwidth(data, kind, c.kernel, c.p, select_options(c));
  return render(c, to_json(sel), format_table(sel), format_csv(sel));
}

std::string run_placebo(const RunConfig& c)
{
  const Dataset data = load(c);
  if (data.d() == 0)
    throw ConfigError("placebo tests need at least one covariate (--covs)");
  data.require_two_sided();
  std::vector<PlaceboSpec> specs;
  for (Eigen::Index k = 0; k < data.d(); ++k) {
    const Dataset cd = data.with_outcome(data.z().col(k)).without_covariates();
    std::vector<std::string> ignored;
    const auto [h, b] = bandwidths(cd, EstimatorKind::standard, c, ignored);
    specs.push_back({make_spec(c, h), b});
  }
  const auto rows = placebo_tests(data, specs, c.vce, c.level);
  return render(c, to_json(rows, c.covariates), format_table(rows, c.covariates),
                format_csv(rows, c.covariates));
}

std::string run_simulate(const RunConfig& c)
{
  DgpSpec dgp;
  if (c.dgp_path) {
    std::ifstream in(*c.dgp_path);
    if (!in)
      throw ConfigError("cannot open DGP file '" + *c.dgp_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    dgp = dgp_from_json(buf.str());
  } else {
    dgp = model_preset(c.model);
  }
  if (c.seed)
    dgp.seed = *c.seed;
  if (c.vce.method == VarianceMethod::cluster && dgp.cluster.groups == 0)
    throw ConfigError("--vce cluster requires a DGP with cluster groups");

  StudyConfig sc;
  sc.n = c.n;
  sc.reps = c.reps;
  sc.methods = c.methods;
  sc.kernel = c.kernel;
  sc.p = c.p;
  sc.select = select_options(c);
  sc.h = c.h;
  sc.b = c.b_equals_h && c.h ? c.h : c.b;
  sc.level = c.level;
  sc.workers = c.workers;
  const auto report = run_study(dgp, sc);
  return render(c, to_json(report), format_table(report), format_csv(report));
}

std::string error_json(const std::string& code, const std::string& message)
{
  return Json{{"error", code}, {"message", message}}.dump();
}

} // namespace

RunResult run(const RunConfig& config)
{
  RunResult r;
  try {
    check_config(config);
    switch (config.subcommand) {
      case Subcommand::estimate:
        r.output = run_estimate(config);
        break;
      case Subcommand::bandwidth:
        r.output = run_bandwidth(config);
        break;
      case Subcommand::placebo:
        r.output = run_placebo(config);
        break;
      case Subcommand::simulate:
        r.output = run_simulate(config);
        break;
    }
    r.exit_code = kExitOk;
  } catch (const ConfigError& e) {
    r.exit_code = kExitConfig;
    r.error = error_json(e.code(), e.what());
  } catch (const Error& e) {
    r.exit_code = kExitNumeric;
    r.error = error_json(e.code(), e.what());
  } catch (const std::exception& e) {
    r.exit_code = kExitNumeric;
    r.error = error_json("internal", e.what());
  }
  return r;
}

namespace {

void add_common(CLI::App* app, RunConfig& c, std::string& kernel, std::string& vce, std::string& format)
{
  app->add_option("--kernel", kernel, "kernel")->check(CLI::IsMember({"tri", "uni", "epa"}));
  app->add_option("--p", c.p, "local polynomial order");
  app->add_option("--h", c.h, "manual main bandwidth");
  app->add_option("--b", c.b, "manual bias bandwidth (requires --h)");
  app->add_option("--bwselect", c.bwselect, "bandwidth rule")->check(CLI::IsMember({"mserd", "cerrd"}));
  app->add_flag("--b-equals-h", c.b_equals_h, "use b = h for bias correction");
  app->add_option("--vce", vce, "variance estimator")
    ->check(CLI::IsMember({"nn", "hc0", "hc1", "hc2", "hc3", "cluster"}));
  app->add_option("--nn-neighbors", c.vce.nn_neighbors, "neighbors for the NN variance");
  app->add_flag("--cluster-dof", c.vce.cluster_dof, "apply G/(G-1) to the cluster variance");
  app->add_option("--level", c.level, "confidence level");
  app->add_option("--format", format, "output format")->check(CLI::IsMember({"table", "json", "csv"}));
  app->add_option("--seed", c.seed, "random seed");
}

void add_data(CLI::App* app, RunConfig& c)
{
  app->add_option("--data", c.data, "CSV file")->required();
  app->add_option("--outcome", c.outcome, "outcome column")->required();
  app->add_option("--score", c.score, "running variable column")->required();
  app->add_option("--covs", c.covariates, "covariate columns")->delimiter(',');
  app->add_option("--cluster", c.cluster, "cluster id column");
  app->add_option("--cutoff", c.cutoff, "RD cutoff");
}

} // namespace

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  RunConfig c;
  std::string kernel = "tri";
  std::string vce = "nn";
  std::string format = "table";
  std::vector<std::string> extra;
  std::vector<std::string> methods{"standard", "covadj"};

  CLI::App app{"Covariate-adjusted regression discontinuity estimation and inference"};
  // --h is the bandwidth, so help is long-form only.
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  auto* est = app.add_subcommand("estimate", "point estimates and robust confidence intervals");
  auto* bw = app.add_subcommand("bandwidth", "data-driven bandwidth selection");
  auto* pl = app.add_subcommand("placebo", "RD effects on each covariate");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study");
  for (auto* sub : {est, bw, pl, sim})
    add_common(sub, c, kernel, vce, format);
  for (auto* sub : {est, bw, pl})
    add_data(sub, c);
  est->add_option("--estimators", extra, "extra point estimators to report")->delimiter(',');
  sim->add_option("--dgp", c.dgp_path, "DGP JSON file");
  sim->add_option("--model", c.model, "built-in model 1-4")->check(CLI::Range(1, 4));
  sim->add_option("--n", c.n, "sample size");
  sim->add_option("--reps", c.reps, "replications");
  sim->add_option("--workers", c.workers, "worker threads");
  sim->add_option("--methods", methods, "estimators to study")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitOk;
    }
    err << error_json("config", e.what()) << '\n';
    return kExitConfig;
  }

  try {
    if (est->parsed())
      c.subcommand = Subcommand::estimate;
    else if (bw->parsed())
      c.subcommand = Subcommand::bandwidth;
    else if (pl->parsed())
      c.subcommand = Subcommand::placebo;
    else
      c.subcommand = Subcommand::simulate;
    c.kernel.kind = parse_kernel(kernel);
    c.vce.method = parse_variance_method(vce);
    c.format = format == "json" ? OutputFormat::json
                                : (format == "csv" ? OutputFormat::csv : OutputFormat::table);
    for (const auto& e : extra)
      c.extra_estimators.push_back(parse_estimator_kind(e));
    c.methods.clear();
    for (const auto& m : methods)
      c.methods.push_back(parse_estimator_kind(m));
  } catch (const ConfigError& e) {
    err << error_json(e.code(), e.what()) << '\n';
    return kExitConfig;
  }

  const RunResult r = run(c);
  out << r.output;
  if (!r.error.empty())
    err << r.error << '\n';
  return r.exit_code;
}

} // namespace rdcov
