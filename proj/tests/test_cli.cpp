#include "helpers.hpp"

#include "rdcov/cli.hpp"
#include "rdcov/data.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <sstream>

using namespace rdcov;
using nlohmann::json;

namespace {

struct Call
{
  int code = 0;
  std::string out;
  std::string err;
};

Call cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "rdcov");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Call c;
  c.code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  c.out = out.str();
  c.err = err.str();
  return c;
}

// Writes a dataset with a jumped covariate `zj` and a balanced one `zb`.
class Fixture
{
public:
  Fixture()
  {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> norm;
    const int n = 1500;
    Eigen::VectorXd x(n), y(n);
    Eigen::MatrixXd z(n, 2);
    for (int i = 0; i < n; ++i) {
      x[i] = u(rng);
      z(i, 0) = 0.4 * x[i] + 0.3 * norm(rng);
      z(i, 1) = 0.2 * x[i] + 0.8 * (x[i] >= 0) + 0.3 * norm(rng);
      y[i] = 0.5 * (x[i] >= 0) + x[i] - 0.5 * x[i] * x[i] + z(i, 0) + 0.2 * norm(rng);
    }
    const Dataset d(y, x, z, std::nullopt, 10.0);
    write_csv(d, path, {"y", "score", {"zb", "zj"}, {}});
  }
  ~Fixture() { std::remove(path.c_str()); }

  std::string path = "cli_fixture.csv";
};

} // namespace

TEST_SUITE("cli")
{
  TEST_CASE("estimate: JSON report shape")
  {
    Fixture f;
    const auto r = cli({"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--covs", "zb",
                        "--cutoff", "10", "--format", "json", "--estimators", "demeaned_common,interacted"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["columns"].size() == 2);
    CHECK(j["columns"][0]["label"] == "Unadjusted");
    CHECK(j["columns"][1]["label"] == "Adjusted");
    CHECK(j["columns"][0]["separate_b"]["ci_length_change_pct"].is_null());
    const auto& adj = j["columns"][1];
    const double change = adj["separate_b"]["ci_length_change_pct"];
    const double l0 = j["columns"][0]["separate_b"]["ci_length"];
    const double l1 = adj["separate_b"]["ci_length"];
    CHECK(change == doctest::Approx(100.0 * (l1 / l0 - 1.0)));
    CHECK(change < 0.0); // the covariate explains most of the noise
    CHECK(adj["point_estimate"].get<double>() == doctest::Approx(0.5).epsilon(0.3));
    CHECK(adj["h"].get<double>() > 0.0);
    CHECK(j["bwselect"] == "mserd");
    CHECK(j["vce"] == "nn");
    REQUIRE(j["diagnostic_estimators"].size() == 2);
    CHECK(j["diagnostic_estimators"][0]["note"] == "diagnostic - not recommended");
    CHECK(j["diagnostic_estimators"][1]["note"] == "");
  }

  TEST_CASE("estimate: table and csv agree with JSON")
  {
    Fixture f;
    const std::vector<std::string> base{"estimate", "--data", f.path, "--outcome", "y", "--score", "score",
                                        "--covs", "zb", "--cutoff", "10", "--h", "0.5", "--b", "0.7"};
    auto with = [&](const std::string& fmt) {
      auto a = base;
      a.push_back("--format");
      a.push_back(fmt);
      return cli(a);
    };
    const auto t = with("table");
    const auto js = with("json");
    const auto cs = with("csv");
    REQUIRE(t.code == 0);
    REQUIRE(js.code == 0);
    REQUIRE(cs.code == 0);
    CHECK(t.out.find("CI length change (%)") != std::string::npos);
    CHECK(t.out.find("Robust 95% CI") != std::string::npos);
    CHECK(t.out.find("Unadjusted") != std::string::npos);
    CHECK(t.out.find("N left | right") != std::string::npos);
    CHECK(cs.out.find("ci_length_change_pct,") != std::string::npos);
    CHECK(cs.out.rfind("row,Unadjusted,Adjusted", 0) == 0);
    const auto j = json::parse(js.out);
    CHECK(j["columns"][1]["h"] == 0.5);
    CHECK(j["columns"][1]["b"] == 0.7);
    CHECK(j["bwselect"] == "manual");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", j["columns"][1]["point_estimate"].get<double>());
    CHECK(t.out.find(buf) != std::string::npos);
  }

  TEST_CASE("bandwidth subcommand")
  {
    Fixture f;
    const auto r = cli({"bandwidth", "--data", f.path, "--outcome", "y", "--score", "score", "--covs", "zb",
                        "--cutoff", "10", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["rule"] == "mse_covadj");
    CHECK(j["h"].get<double>() > 0.0);
    CHECK(j["pilot"]["v"].get<double>() > 0.0);
    const auto cer = cli({"bandwidth", "--data", f.path, "--outcome", "y", "--score", "score", "--cutoff", "10",
                          "--bwselect", "cerrd", "--format", "json"});
    REQUIRE(cer.code == 0);
    CHECK(json::parse(cer.out)["rule"] == "cer_standard");
  }

  TEST_CASE("placebo flags the jumped covariate")
  {
    Fixture f;
    const auto r = cli({"placebo", "--data", f.path, "--outcome", "y", "--score", "score", "--covs", "zb,zj",
                        "--cutoff", "10", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["covariate"] == "zb");
    CHECK(j[1]["covariate"] == "zj");
    CHECK(j[1]["p_value"].get<double>() < 0.01);
    CHECK(j[0]["p_value"].get<double>() > 0.001);
  }

  TEST_CASE("simulate subcommand")
  {
    const auto r = cli({"simulate", "--model", "4", "--n", "300", "--reps", "5", "--format", "json", "--seed", "3"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["reps"] == 5);
    CHECK(j["seed"] == 3);
    CHECK(cli({"simulate", "--model", "4", "--n", "300", "--reps", "5", "--format", "json", "--seed", "3",
               "--workers", "2"})
            .out == r.out);
  }

  TEST_CASE("configuration errors exit with 2 and a JSON message")
  {
    Fixture f;
    const std::vector<std::vector<std::string>> bad{
      {"estimate", "--data", "/nonexistent.csv", "--outcome", "y", "--score", "score"},
      {"estimate", "--data", f.path, "--outcome", "nope", "--score", "score"},
      {"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--h", "0.5", "--bwselect", "mserd"},
      {"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--b", "0.5"},
      {"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--vce", "cluster"},
      {"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--level", "1.5"},
      {"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--kernel", "gauss"},
      {"bandwidth", "--data", f.path, "--outcome", "y", "--score", "score", "--h", "0.3"},
      {"placebo", "--data", f.path, "--outcome", "y", "--score", "score"},
      {"estimate", "--outcome", "y"},
      {"simulate", "--methods", "interacted"},
    };
    for (const auto& args : bad) {
      const auto r = cli(args);
      INFO(args[0], " ", args.back());
      CHECK(r.code == kExitConfig);
      REQUIRE_FALSE(r.err.empty());
      const auto j = json::parse(r.err.substr(0, r.err.find('\n')));
      CHECK(j.contains("error"));
      CHECK(j.contains("message"));
    }
  }

  TEST_CASE("numerical failures exit with 3")
  {
    Fixture f;
    // One-sided data.
    const auto one = cli({"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--cutoff", "-5"});
    CHECK(one.code == kExitNumeric);
    CHECK(json::parse(one.err.substr(0, one.err.find('\n')))["error"] == "one_sided");
    // Bandwidth too small to leave points on each side.
    const auto tiny = cli({"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--cutoff", "10",
                           "--h", "0.0001"});
    CHECK(tiny.code == kExitNumeric);
  }

  TEST_CASE("run() mirrors run_main")
  {
    Fixture f;
    RunConfig c;
    c.data = f.path;
    c.outcome = "y";
    c.score = "score";
    c.cutoff = 10.0;
    c.format = OutputFormat::json;
    const auto r = run(c);
    CHECK(r.exit_code == 0);
    CHECK(r.output == cli({"estimate", "--data", f.path, "--outcome", "y", "--score", "score", "--cutoff", "10",
                           "--format", "json"})
                        .out);
    c.level = 0.0;
    CHECK(run(c).exit_code == kExitConfig);
  }

  TEST_CASE("help")
  {
    const auto r = cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("estimate") != std::string::npos);
  }
}
