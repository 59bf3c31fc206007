#include <catch_amalgamated.hpp>

#include <cmath>

#include "iiss/errors.hpp"
#include "iiss/numerics.hpp"
#include "iiss/ratefns.hpp"

using namespace iiss;
using Catch::Approx;

namespace {

RateFunction square() { return RateFunction("s^2", [](double s) { return s * s; }, RateClass::Kinf); }

RateFunction psi51() {
  return RateFunction("psi51", [](double s) { return s + 4 * s * s + 4 * s * s * s; },
                      RateClass::Kinf);
}

}  // namespace

TEST_CASE("adaptive simpson integrates smooth and kinked functions", "[numerics]") {
  const auto r = num::adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0);
  CHECK(r.value == Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  const auto back = num::adaptive_simpson([](double x) { return x * x; }, 2.0, 0.0);
  CHECK(back.value == Approx(-8.0 / 3.0).epsilon(1e-12));
  const double breaks[] = {1.0};
  const auto kink = num::integrate_split([](double x) { return std::abs(x - 1.0); }, 0.0, 3.0,
                                         breaks);
  CHECK(kink.value == Approx(2.5).epsilon(1e-12));
}

TEST_CASE("quadrature rejects non-finite integrands", "[numerics]") {
  CHECK_THROWS_AS(num::adaptive_simpson([](double x) { return 1.0 / x; }, 0.0, 1.0),
                  QuadratureError);
}

TEST_CASE("golden section finds interior extrema", "[numerics]") {
  const auto m = num::golden_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-10);
  CHECK(m.arg == Approx(0.3).margin(1e-8));
  const auto n = num::golden_min([](double x) { return std::cosh(x - 2.0); }, 0.0, 5.0, 1e-10);
  CHECK(n.arg == Approx(2.0).margin(1e-7));
}

TEST_CASE("stable log sinh and its inverse", "[numerics]") {
  for (double x : {1e-8, 1e-3, 0.5, 1.0, 10.0, 30.0, 700.0, 5000.0}) {
    const double y = num::log_sinh(x);
    CHECK(std::isfinite(y));
    CHECK(num::log_sinh_inverse(y) == Approx(x).epsilon(1e-12));
  }
  CHECK(num::log_sinh(1.0) == Approx(std::log(std::sinh(1.0))).epsilon(1e-14));
  CHECK(num::log_cosh(3.0) == Approx(std::log(std::cosh(3.0))).epsilon(1e-14));
}

TEST_CASE("verify_class accepts genuine class members", "[ratefns]") {
  CHECK(verify_class(square(), RateClass::Kinf, {0.0, 10.0, 1001}).consistent());
  CHECK(verify_class(psi51(), RateClass::Kinf, {0.0, 10.0, 1001}).consistent());
}

TEST_CASE("verify_class reports non-monotone K claims with a witness", "[ratefns]") {
  RateFunction s("sin", [](double x) { return std::sin(x); }, RateClass::K);
  const auto rep = verify_class(s, RateClass::K, {0.0, 10.0, 1001});
  REQUIRE_FALSE(rep.consistent());
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.predicate == "strictly increasing") {
      found = true;
      CHECK(v.at >= M_PI / 2 - 0.02);
      CHECK(v.at <= M_PI + 0.02);
    }
  }
  CHECK(found);
}

TEST_CASE("verify_class flags a P claim that misses the origin", "[ratefns]") {
  RateFunction f("1+s", [](double s) { return 1.0 + s; }, RateClass::P);
  CHECK_FALSE(verify_class(f, RateClass::P, {}).consistent());
  RateFunction b("bounded", [](double s) { return s / (1.0 + s); }, RateClass::Kinf);
  CHECK_FALSE(verify_class(b, RateClass::Kinf, {0.0, 1e9, 200, true}).consistent());
}

TEST_CASE("invert solves f(x) = y by bisection", "[ratefns]") {
  CHECK(invert(square(), 4.0) == Approx(2.0).epsilon(1e-10));
  CHECK(invert(RateFunction::identity(), 0.0) == 0.0);
  // Piecewise η: s/(2√2) up to √2, s²/4 beyond; y = 1 sits on the outer branch.
  RateFunction eta("eta", [](double s) {
    return s <= std::sqrt(2.0) ? s / (2.0 * std::sqrt(2.0)) : s * s / 4.0;
  }, RateClass::Kinf);
  const double x = invert(eta, 1.0);
  CHECK(x == Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(eta(x) - 1.0) <= 1e-12 + 1e-10);
}

TEST_CASE("invert reports the achievable range", "[ratefns]") {
  RateFunction b("bounded", [](double s) { return s / (1.0 + s); }, RateClass::K);
  b.with_domain_max(1e6);
  try {
    (void)invert(b, 2.0);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.achievable_lo() == 0.0);
    CHECK(e.achievable_hi() < 1.0);
  }
  CHECK_THROWS_AS(invert(b, -1.0), RangeError);
}

TEST_CASE("invert is a left inverse of evaluation on samples", "[ratefns]") {
  const auto f = psi51();
  for (double s : num::log_grid(1e-4, 1e3, 60)) {
    CHECK(invert(f, f(s)) == Approx(s).epsilon(1e-9));
  }
}

TEST_CASE("iterate composes k times", "[ratefns]") {
  const auto f = RateFunction::linear(2.0);
  CHECK(iterate(f, 3)(1.5) == Approx(12.0));
  CHECK(iterate(f, 0)(3.7) == 3.7);
  CHECK(iterate(f, 0).is_identity());
  const auto psibar = max_with_identity(psi51());
  // Oracle: ψ(0.1) = 0.144, ψ(0.144) = 0.144 + 4·0.144² + 4·0.144³.
  const double inner = 0.1 + 4 * 0.01 + 4 * 0.001;
  const double expect = inner + 4 * inner * inner + 4 * inner * inner * inner;
  CHECK(iterate(psibar, 2)(0.1) == Approx(expect).epsilon(1e-14));
  CHECK(expect == Approx(0.2388).margin(1e-4));
}

TEST_CASE("iterate splits additively and nests multiplicatively", "[ratefns]") {
  const auto f = psi51();
  for (double s : {0.01, 0.05, 0.1}) {
    CHECK(iterate(f, 5)(s) == Approx(compose(iterate(f, 2), iterate(f, 3))(s)).epsilon(1e-13));
    CHECK(iterate(f, 6)(s) == Approx(iterate(iterate(f, 2), 3)(s)).epsilon(1e-13));
  }
}

TEST_CASE("iterate raises a domain error on overflow", "[ratefns]") {
  CHECK_THROWS_AS(iterate(psi51(), 200)(0.5), DomainError);
  RateFunction capped = RateFunction::linear(2.0);
  capped.with_domain_max(10.0);
  CHECK_THROWS_AS(iterate(capped, 5)(1.0), DomainError);
}

TEST_CASE("majorize_nondecreasing builds the running maximum", "[ratefns]") {
  RateFunction hump("s(1-s)", [](double s) { return s * (1.0 - s); });
  hump.with_domain_max(1.0);
  const auto m = majorize_nondecreasing(hump, {1e-6, 1.0, 400});
  for (double s : num::linear_grid(0.0, 1.0, 101)) {
    const double expect = s <= 0.5 ? s * (1.0 - s) : 0.25;
    CHECK(m(s) == Approx(expect).margin(1e-6));
    CHECK(m(s) >= hump(s) - 1e-12);
  }
  const auto twice = majorize_nondecreasing(m, {1e-6, 1.0, 400});
  for (double s : m.breakpoints()) {
    CHECK(twice(s) == Approx(m(s)).margin(1e-12));
  }
}

TEST_CASE("majorize_nondecreasing keeps nondecreasing inputs", "[ratefns]") {
  RateFunction psi52("psi52", [](double s) {
    return s <= 1.0 ? 0.5 * s * s * s : 0.5 * std::cbrt(s);
  }, RateClass::K);
  psi52.with_breakpoints({1.0});
  const auto m = majorize_nondecreasing(psi52, {1e-6, 1e3, 600});
  for (double s : m.breakpoints()) {
    CHECK(m(s) == Approx(psi52(s)).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("reciprocal integral uses closed forms or log-substituted quadrature", "[ratefns]") {
  const auto id = RateFunction::identity();
  CHECK(reciprocal_integral(id, 1.0, std::exp(2.0)).value == Approx(2.0));
  RateFunction sq("s^2", [](double s) { return s * s; });
  CHECK(reciprocal_integral(sq, 1.0, 1e6).value == Approx(1.0 - 1e-6).epsilon(1e-9));
  RateFunction th("tanh", [](double s) { return std::tanh(s); });
  const double exact = num::log_sinh(3.0) - num::log_sinh(0.2);
  CHECK(reciprocal_integral(th, 0.2, 3.0).value == Approx(exact).epsilon(1e-9));
}

TEST_CASE("verify_kl accepts exponential decay and rejects growth", "[ratefns]") {
  KLFunction good("r e^-t", [](double r, double t) { return r * std::exp(-t); });
  const auto r = num::linear_grid(0.0, 5.0, 21);
  const auto t = num::linear_grid(0.0, 10.0, 21);
  CHECK(verify_kl(good, r, t).consistent());
  KLFunction bad("r e^t", [](double r, double t) { return r * std::exp(t); });
  CHECK_FALSE(verify_kl(bad, r, t).consistent());
}
