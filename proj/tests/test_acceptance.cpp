// Full acceptance suite: one pass/fail line per criterion, plus a meta-test
// that the registry still contains every criterion.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <iostream>

#include "dsg/experiments.hpp"

TEST_CASE("all ten criteria are registered, in order") {
  const auto& criteria = dsg::acceptance_criteria();
  REQUIRE(criteria.size() == 10);
  for (size_t i = 0; i < criteria.size(); ++i) {
    CHECK(criteria[i].id == static_cast<int>(i) + 1);
    CHECK_FALSE(criteria[i].name.empty());
    CHECK(static_cast<bool>(criteria[i].run));
  }
}

TEST_CASE("the acceptance suite passes") {
  CHECK(dsg::run_acceptance(std::cout) == 0);
}
