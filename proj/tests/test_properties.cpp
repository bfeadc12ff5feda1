#include "doctest.h"
#include "support/property_suites.hpp"

using namespace dred;

TEST_CASE("total derivatives commute on random expressions") {
  auto res = props::commuting_derivatives(0xbeef1ULL, 200);
  CHECK(res.cases == 200);
  CHECK(res.failures == 0);
}

TEST_CASE("total derivative satisfies the product rule") {
  auto res = props::leibniz_rule(0xbeef2ULL, 200);
  CHECK(res.cases == 200);
  CHECK(res.failures == 0);
}

TEST_CASE("prolonged coefficients satisfy the recursion") {
  auto res = props::prolongation_recursion(0xbeef3ULL, 200);
  CHECK(res.cases == 200);
  CHECK(res.failures == 0);
}

TEST_CASE("the flux bracket is linear in the generator") {
  auto res = props::bracket_linearity(0xbeef4ULL, 200);
  CHECK(res.cases == 200);
  CHECK(res.failures == 0);
}
