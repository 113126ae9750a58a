#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsg/poisson.hpp"

using namespace dsg;

TEST_CASE("lambda from edge probability") {
  CHECK(lambda_of_p(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(lambda_of_p(1.0 - std::exp(-2.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(lambda_of_p(0.0), std::domain_error);
  CHECK_THROWS_AS(lambda_of_p(1.0), std::domain_error);
}

TEST_CASE("the ln 2 point in closed form") {
  // at lambda = ln 2 the CDF hits exactly 1/2 at k = 0, so m = 0, beta = 1
  PoissonPoint pt = evaluate_point(std::log(2.0));
  CHECK(pt.m == 0);
  CHECK(pt.beta == doctest::Approx(1.0));
  CHECK(pt.exp_fstar == doctest::Approx(0.5 - std::log(2.0) / 2.0).epsilon(1e-9));
  CHECK(pt.exp_fstar == doctest::Approx(0.153426).epsilon(1e-5));
  CHECK(pt.efy == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-9));
  CHECK(pt.ratio == doctest::Approx(pt.exp_fstar / 0.5));
}

TEST_CASE("E[F*Y] equals lambda/2 everywhere") {
  for (double lam : {0.01, 0.3, 1.0, 1.678347, 5.0, 12.5, 19.99})
    CHECK(evaluate_point(lam).efy == doctest::Approx(lam / 2.0).epsilon(1e-9));
}

TEST_CASE("median and beta behave across boundaries") {
  std::vector<double> b = lambda_boundaries(5);
  CHECK(b[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  for (size_t i = 1; i < b.size(); ++i) CHECK(b[i] > b[i - 1]);
  // just below/above a boundary the median steps by one
  CHECK(evaluate_point(b[1] - 1e-6).m == 1);
  CHECK(evaluate_point(b[1] + 1e-6).m == 2);
  for (double lam : {0.1, 0.9, 2.3, 7.7}) {
    PoissonPoint pt = evaluate_point(lam);
    CHECK(pt.beta > 0.0);
    CHECK(pt.beta <= 1.0);
    // cross-check the median against the CDF definition
    double cdf = 0.0, q = std::exp(-lam);
    for (int k = 0; k < pt.m; ++k) {
      cdf += q;
      q *= lam / (k + 1);
    }
    CHECK(cdf < 0.5);
    CHECK(cdf + q >= 0.5);
  }
}

TEST_CASE("the ratio minimum matches the published constant") {
  RatioMinimum mn = minimize_ratio();
  CHECK(mn.lambda == doctest::Approx(1.678347).epsilon(1e-4));
  CHECK(mn.ratio == doctest::Approx(1.0 / 3.43068).epsilon(1e-5));
}

TEST_CASE("every feasible perturbation stays above the bound") {
  CHECK(lemma_direct_check(std::log(2.0), 50, 1));
  CHECK(lemma_direct_check(1.678347, 50, 2));
  CHECK(lemma_direct_check(8.0, 50, 3));
}

TEST_CASE("invalid lambda is rejected") {
  CHECK_THROWS_AS(evaluate_point(0.0), std::domain_error);
  CHECK_THROWS_AS(evaluate_point(-1.0), std::domain_error);
}
