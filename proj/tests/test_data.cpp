#include "helpers.hpp"

#include "rdcov/data.hpp"
#include "rdcov/error.hpp"
#include "rdcov/estimators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

using namespace rdcov;

namespace {

bool has_warning(const DiagnosticsReport& r, const std::string& needle)
{
  return std::any_of(r.warnings.begin(), r.warnings.end(),
                     [&](const std::string& w) { return w.find(needle) != std::string::npos; });
}

} // namespace

TEST_SUITE("data")
{
  TEST_CASE("cutoff normalization")
  {
    const std::string csv = "mort,poverty\n1.5,50.0\n2.5,59.1984\n3.0,61.5\n0.5,70.25\n";
    const auto d = parse_csv(csv, {"mort", "poverty", {}, {}}, 59.1984);
    REQUIRE(d.n() == 4);
    const double raw[] = {50.0, 59.1984, 61.5, 70.25};
    for (int i = 0; i < 4; ++i)
      CHECK(d.x()[i] == doctest::Approx(raw[i] - 59.1984).epsilon(1e-15));
    CHECK(d.cutoff() == 59.1984);
    CHECK(d.x()[1] == 0.0);
    CHECK(d.treated(1)); // x = 0 is on the treated side
    CHECK_FALSE(d.treated(0));
    CHECK(d.n_left() == 1);
    CHECK(d.n_right() == 3);
  }

  TEST_CASE("zero cutoff keeps the score")
  {
    const auto d = parse_csv("y,x\n1,-0.25\n2,0.125\n3,0.5\n", {"y", "x", {}, {}}, 0.0);
    CHECK(d.x()[0] == -0.25);
    CHECK(d.x()[1] == 0.125);
    CHECK(d.x()[2] == 0.5);
  }

  TEST_CASE("one-sided data is flagged and estimators refuse")
  {
    const auto d = parse_csv("y,x\n1,5\n2,6\n3,7\n4,8\n", {"y", "x", {}, {}}, 5.0);
    CHECK(d.one_sided());
    CHECK(has_warning(validate(d), "one-sided"));
    CHECK_THROWS_AS(estimate(d, EstimatorKind::standard, testing::spec(10.0)), OneSidedError);
  }

  TEST_CASE("missing values are dropped and counted")
  {
    const std::string csv = "y,x,z\n1,-1,0.5\nNA,-0.5,1\n2,0.5,\n3,1,.\n4,0.25,2\n5,-0.2,NaN\n";
    const auto d = parse_csv(csv, {"y", "x", {"z"}, {}}, 0.0);
    CHECK(d.n() == 2);
    CHECK(d.dropped_rows() == 4);
    CHECK(validate(d).dropped_rows == 4);
    // Unused columns do not trigger deletion.
    const auto d2 = parse_csv(csv, {"x", "x", {}, {}}, 0.0);
    CHECK(d2.n() == 6);
  }

  TEST_CASE("schema, parse and empty-data errors")
  {
    CHECK_THROWS_AS(parse_csv("y,x\n1,2\n", {"y", "score", {}, {}}, 0.0), SchemaError);
    try {
      parse_csv("y,x\n1,2\n3,abc\n", {"y", "x", {}, {}}, 0.0);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);
      CHECK(msg.find("'x'") != std::string::npos);
      CHECK(e.code() == "parse");
    }
    CHECK_THROWS_AS(parse_csv("y,x\nNA,1\n", {"y", "x", {}, {}}, 0.0), EmptyDataError);
    CHECK_THROWS_AS(parse_csv("", {"y", "x", {}, {}}, 0.0), EmptyDataError);
    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv", {"y", "x", {}, {}}, 0.0), ConfigError);
  }

  TEST_CASE("quoted cells, BOM and string cluster labels")
  {
    const std::string csv = "\xEF\xBB\xBF\"y\",x,g\n1,-1,\"school, A\"\n2,1,B\n3,0.5,\"school, A\"\n";
    const auto d = parse_csv(csv, {"y", "x", {}, std::string("g")}, 0.0);
    REQUIRE(d.cluster());
    CHECK((*d.cluster())[0] == 0);
    CHECK((*d.cluster())[1] == 1);
    CHECK((*d.cluster())[2] == 0);
    CHECK(d.n_clusters() == 2);
  }

  TEST_CASE("write then load round-trips")
  {
    std::mt19937_64 rng(7);
    const auto d = testing::random_dataset(rng, 40, 2);
    const Dataset shifted(d.y(), d.x(), d.z(), std::nullopt, 59.1984);
    const CsvSchema schema{"y", "score", {"a", "b"}, {}};
    const std::string path = "roundtrip_test.csv";
    write_csv(shifted, path, schema);
    const auto back = load_csv(path, schema, 59.1984);
    std::remove(path.c_str());
    REQUIRE(back.n() == d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      CHECK(back.y()[i] == d.y()[i]);
      CHECK(back.x()[i] == doctest::Approx(d.x()[i]).epsilon(1e-13));
      CHECK(back.treated(i) == d.treated(i));
      for (Eigen::Index k = 0; k < 2; ++k)
        CHECK(back.z()(i, k) == d.z()(i, k));
    }
  }

  TEST_CASE("validate: balanced data has no warnings")
  {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(200, -1.0, 1.0);
    Eigen::VectorXd y = x.array().sin();
    Eigen::MatrixXd z(200, 1);
    z.col(0) = x.array().cos();
    const auto r = validate(Dataset(y, x, z));
    CHECK(r.warnings.empty());
    CHECK(r.n_left == 100);
    CHECK(r.n_right == 100);
    CHECK(r.covariate_rank == 1);
    CHECK(r.x_min == -1.0);
    CHECK(r.x_max == 1.0);
  }

  TEST_CASE("validate: constant covariate column")
  {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(50, -1.0, 1.0);
    Eigen::MatrixXd z(50, 2);
    z.col(0) = x;
    z.col(1).setConstant(3.0);
    const auto r = validate(Dataset(x, x, z));
    CHECK(has_warning(r, "collinear with intercept"));
    CHECK(r.covariate_rank == 1);
  }

  TEST_CASE("validate: small side")
  {
    Eigen::VectorXd x(30);
    for (int i = 0; i < 30; ++i)
      x[i] = i < 3 ? -0.1 * (i + 1) : 0.03 * i;
    const auto r = validate(Dataset(x, x));
    CHECK(r.n_left == 3);
    CHECK(has_warning(r, "few observations below the cutoff"));
  }

  TEST_CASE("validate: density gap near the cutoff")
  {
    Eigen::VectorXd x(400);
    for (int i = 0; i < 400; ++i)
      x[i] = i < 200 ? -0.2 - 0.004 * i : 0.0005 * (i - 200);
    const auto r = validate(Dataset(x, x));
    CHECK(has_warning(r, "density gap"));
  }

  TEST_CASE("constructor rejects non-finite values and bad shapes")
  {
    Eigen::VectorXd y(3), x(3);
    y << 1, 2, std::nan("");
    x << -1, 0, 1;
    CHECK_THROWS_AS(Dataset(y, x), ConfigError);
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd(2), x), ConfigError);
    CHECK_THROWS_AS(Dataset(Eigen::VectorXd(0), Eigen::VectorXd(0)), EmptyDataError);
  }
}
