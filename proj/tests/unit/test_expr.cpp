#include <catch_amalgamated.hpp>

#include <cmath>

#include "iiss/errors.hpp"
#include "iiss/expr.hpp"

using namespace iiss;
using iiss::expr::Expression;
using Catch::Approx;

TEST_CASE("arithmetic and precedence", "[expr]") {
  const auto e = [](const char* text) { return Expression::parse(text, {})({}); };
  CHECK(e("1 + 2 * 3") == 7.0);
  CHECK(e("(1 + 2) * 3") == 9.0);
  CHECK(e("2 ^ 3 ^ 2") == 512.0);
  CHECK(e("-2 ^ 2") == -4.0);
  CHECK(e("2 * -3") == -6.0);
  CHECK(e("10 - 4 - 3") == 3.0);
  CHECK(e("8 / 4 / 2") == 1.0);
  CHECK(e("1.5e2 + .5") == 150.5);
  CHECK(e("pi") == Approx(M_PI));
  CHECK(e("log(e)") == 1.0);
  CHECK(e("1 < 2") == 1.0);
  CHECK(e("2 <= 1") == 0.0);
  CHECK(e("1 + 1 == 2") == 1.0);
  CHECK(e("min(3, 1, 2) + max(4, 5)") == 6.0);
  CHECK(e("if(0, 1, 2)") == 2.0);
  CHECK(e("pow(2, 10)") == 1024.0);
  CHECK(e("cbrt(-8)") == -2.0);
  CHECK(e("sign(-3) + abs(-3)") == 2.0);
}

TEST_CASE("variables", "[expr]") {
  const auto f = Expression::parse("-x0 + sqrt(2) * u0 * t", {"t", "x0", "u0"});
  CHECK(f({2.0, 1.0, 3.0}) == Approx(-1.0 + std::sqrt(2.0) * 6.0));
  CHECK(f.uses("x0"));
  CHECK_FALSE(Expression::parse("x0", {"t", "x0"}).uses("t"));
  // Piecewise via if: the destabilizing example's flow map.
  const auto g = Expression::parse("if(abs(x0) <= sqrt(2), -x0 + sqrt(2)*u0, -x0^3/2 + abs(x0)*u0)",
                                   {"x0", "u0"});
  CHECK(g({1.0, 0.5}) == Approx(-1.0 + std::sqrt(2.0) * 0.5));
  CHECK(g({2.0, 0.5}) == Approx(-4.0 + 1.0));
}

TEST_CASE("syntax errors name the column", "[expr]") {
  CHECK_THROWS_AS(Expression::parse("1 +", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(1", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("y", {"x"}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(1)", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("pow(1)", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("1 2", {}), ConfigError);
  try {
    (void)Expression::parse("1 + $", {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("column 5") != std::string::npos);
  }
}

TEST_CASE("rate from expression", "[expr]") {
  const auto r = expr::rate_from_expression("psi", "if(s <= 1, s^3/2, cbrt(s)/2)", RateClass::Kinf,
                                            {1.0});
  CHECK(r(4.0) == Approx(std::cbrt(4.0) / 2));
  CHECK(r(0.5) == 0.0625);
  CHECK(r.breakpoints() == std::vector<double>{1.0});
  CHECK(r.tag() == RateClass::Kinf);
}
