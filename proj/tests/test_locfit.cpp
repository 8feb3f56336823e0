#include "helpers.hpp"

#include "rdcov/error.hpp"
#include "rdcov/locfit.hpp"

#include <doctest.h>

using namespace rdcov;

TEST_SUITE("locfit")
{
  TEST_CASE("kernel values")
  {
    const Kernel tri{KernelKind::triangular};
    const Kernel uni{KernelKind::uniform};
    const Kernel epa{KernelKind::epanechnikov};
    CHECK(kernel_weight(tri, 0.0) == 1.0);
    CHECK(kernel_weight(tri, 0.5) == 0.5);
    CHECK(kernel_weight(tri, -0.5) == 0.5);
    CHECK(kernel_weight(uni, -0.3) == 1.0);
    CHECK(kernel_weight(uni, 1.2) == 0.0);
    CHECK(kernel_weight(epa, 0.0) == 0.75);
    CHECK(kernel_weight(epa, 0.5) == doctest::Approx(0.5625));
    // Boundary convention: k(1).
    CHECK(kernel_weight(tri, 1.0) == 0.0);
    CHECK(kernel_weight(uni, 1.0) == 1.0);
    CHECK(kernel_weight(uni, -1.0) == 1.0);
    CHECK(kernel_weight(epa, 1.0) == 0.0);
    CHECK(parse_kernel("tri") == KernelKind::triangular);
    CHECK(parse_kernel("epanechnikov") == KernelKind::epanechnikov);
    CHECK_THROWS_AS(parse_kernel("gauss"), ConfigError);
  }

  TEST_CASE("local constant with a single in-side point")
  {
    Eigen::VectorXd x(2);
    x << -0.5, 0.5;
    LocalFitSpec s;
    s.kernel.kind = KernelKind::uniform;
    s.p = 0;
    s.h = 1.0;
    s.side = Side::right;
    const auto w = fit_weights(s, x);
    CHECK(w.w[0] == 0.0);
    CHECK(w.w[1] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(w.effective_n == 1);
  }

  TEST_CASE("polynomial reproduction")
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(80);
    for (auto& v : x)
      v = u(rng);
    for (int p = 0; p <= 3; ++p)
      for (Side side : {Side::left, Side::right})
        for (int deriv = 0; deriv <= p; ++deriv) {
          LocalFitSpec s = testing::spec(0.8, p);
          s.side = side;
          const auto w = fit_weights(s, x, deriv);
          for (int m = 0; m <= p; ++m) {
            const double moment = w.apply(x.array().pow(m).matrix());
            const double expect = m == deriv ? oracle::fact(deriv) : 0.0;
            CHECK(moment == doctest::Approx(expect).epsilon(1e-9).scale(1.0));
          }
          // Zero outside the window and on the other side.
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (std::abs(x[i]) >= 0.8 || !on_side(x[i], side))
              CHECK(w.w[i] == 0.0);
        }
    // y = a + b x recovered exactly at the intercept.
    LocalFitSpec s = testing::spec(0.7, 1);
    s.side = Side::right;
    const auto w = fit_weights(s, x);
    CHECK(w.apply((3.25 - 1.5 * x.array()).matrix()) == doctest::Approx(3.25).epsilon(1e-12));
  }

  TEST_CASE("fit weights match the dense oracle")
  {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(50);
    for (auto& v : x)
      v = u(rng);
    for (auto k : {KernelKind::triangular, KernelKind::uniform, KernelKind::epanechnikov})
      for (int deriv = 0; deriv <= 2; ++deriv) {
        LocalFitSpec s = testing::spec(0.9, 2, k);
        s.side = Side::left;
        const auto w = fit_weights(s, x, deriv);
        const auto ref = oracle::side_weights(testing::to_vec(x), false, testing::to_oracle(k), 2, 0.9, deriv);
        CHECK(oracle::max_abs_diff(testing::to_vec(w.w), ref) < 1e-10);
      }
  }

  TEST_CASE("insufficient data and domain errors")
  {
    Eigen::VectorXd x(5);
    x << -0.5, -0.2, 0.1, 0.1, 0.3;
    LocalFitSpec s = testing::spec(1.0, 2);
    s.side = Side::left;
    try {
      fit_weights(s, x);
      FAIL("expected InsufficientDataError");
    } catch (const InsufficientDataError& e) {
      CHECK(std::string(e.what()).find("left") != std::string::npos);
    }
    s.side = Side::right;
    s.h = -1.0;
    CHECK_THROWS_AS(fit_weights(s, x), DomainError);
    s.h = 1.0;
    s.p = 1;
    CHECK_THROWS_AS(fit_weights(s, x, 2), DomainError);
    s.p = 5;
    CHECK_THROWS_AS(joint_fit(s, x, x, Eigen::MatrixXd(5, 0)), DomainError);
  }

  TEST_CASE("joint fit: exact linear model")
  {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(41, -1.0, 1.0);
    Eigen::VectorXd y(41);
    for (int i = 0; i < 41; ++i)
      y[i] = 1.0 + 2.0 * (x[i] >= 0) + 3.0 * x[i];
    for (auto k : {KernelKind::triangular, KernelKind::uniform}) {
      const auto f = joint_fit(testing::spec(0.75, 1, k), x, y, Eigen::MatrixXd(41, 0));
      CHECK(f.coef[0] == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(f.coef[1] == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(f.coef[2] == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(std::abs(f.coef[3]) < 1e-11);
    }
  }

  TEST_CASE("joint fit: zero extra column is a rank error naming the block")
  {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, -1.0, 1.0);
    try {
      joint_fit(testing::spec(1.0), x, x, Eigen::MatrixXd::Zero(30, 1));
      FAIL("expected RankDeficientError");
    } catch (const RankDeficientError& e) {
      CHECK(std::string(e.what()).find("covariate block collinear") != std::string::npos);
    }
  }

  TEST_CASE("joint fit matches the dense oracle; residual orthogonality; side difference")
  {
    std::mt19937_64 rng(3);
    const auto d = testing::random_dataset(rng, 40, 2);
    const auto s = testing::spec(0.9, 1);
    const auto f = joint_fit(s, d.x(), d.y(), d.z());
    const auto ref = oracle::rd_coefficients(testing::to_vec(d.x()), testing::to_vec(d.y()),
                                             testing::to_mat(d.z()), oracle::Kind::covadj, oracle::K::tri, 1, 0.9);
    CHECK(oracle::max_abs_diff(testing::to_vec(f.coef), ref) < 1e-10);

    // X'W(y - X beta) = 0.
    Eigen::VectorXd score = Eigen::VectorXd::Zero(f.coef.size());
    for (Eigen::Index i = 0; i < d.n(); ++i) {
      const double w = kernel_weight(s.kernel, d.x()[i] / s.h);
      if (w == 0.0)
        continue;
      const double t = d.treated(i);
      Eigen::VectorXd row(6);
      row << 1, t, d.x()[i], t * d.x()[i], d.z()(i, 0), d.z()(i, 1);
      score += w * row * (d.y()[i] - row.dot(f.coef));
    }
    CHECK(score.cwiseAbs().maxCoeff() < 1e-9);

    // The joint-regression jump equals the difference of one-sided intercepts.
    const auto f0 = joint_fit(s, d.x(), d.y(), Eigen::MatrixXd(d.n(), 0));
    LocalFitSpec l = s, r = s;
    l.side = Side::left;
    r.side = Side::right;
    const double diff = fit_weights(r, d.x()).apply(d.y()) - fit_weights(l, d.x()).apply(d.y());
    CHECK(f0.jump() == doctest::Approx(diff).epsilon(1e-12));
  }

  TEST_CASE("locality and kernel-scale invariance")
  {
    std::mt19937_64 rng(9);
    const auto d = testing::random_dataset(rng, 60, 0);
    LocalFitSpec s = testing::spec(0.5, 1);
    s.side = Side::right;
    const auto w = fit_weights(s, d.x());
    Eigen::VectorXd y = d.y();
    for (Eigen::Index i = 0; i < y.size(); ++i)
      if (w.w[i] == 0.0)
        y[i] += 100.0;
    CHECK(w.apply(y) == w.apply(d.y()));
    // Uniform weights scaled by a constant give the same estimator: compare
    // the uniform kernel against the oracle with weights 1 (scale-free).
    s.kernel.kind = KernelKind::uniform;
    const auto wu = fit_weights(s, d.x());
    const auto ref = oracle::side_weights(testing::to_vec(d.x()), true, oracle::K::uni, 1, 0.5, 0);
    CHECK(oracle::max_abs_diff(testing::to_vec(wu.w), ref) < 1e-12);
  }
}
