#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "iiss/comparison.hpp"
#include "iiss/errors.hpp"
#include "iiss/presets.hpp"
#include "iiss/simulator.hpp"

using namespace iiss;
using Catch::Approx;

namespace {

ImpulsiveSystem scalar(std::function<double(double, double)> f, std::function<double(double)> g) {
  ImpulsiveSystem s;
  s.name = "scalar";
  s.n = 1;
  s.m = 0;
  s.f = [f](double t, const Vec& x, const Vec&) { return Vec::Constant(1, f(t, x[0])).eval(); };
  s.g = [g](double, const Vec& x, const Vec&) { return Vec::Constant(1, g(x[0])).eval(); };
  return s;
}

Vec v1(double a) { return Vec::Constant(1, a); }

ImpulseSequence integers(int k, double horizon) {
  std::vector<double> v;
  for (int i = 1; i <= k; ++i) v.push_back(i);
  return ImpulseSequence(v, horizon);
}

}  // namespace

TEST_CASE("zero dynamics keep the state constant", "[simulator]") {
  ImpulsiveSystem s;
  s.n = 2;
  s.m = 0;
  s.f = [](double, const Vec& x, const Vec&) { return Vec::Zero(x.size()).eval(); };
  s.g = s.f;
  Vec x0(2);
  x0 << 1.5, -2.0;
  const auto tr = integrate(s, integers(5, 6.0), 0.0, x0, InputSignal::zero(0), 6.0);
  CHECK(tr.final_state() == x0);
  REQUIRE(tr.jumps.size() == 5);
  for (const auto& j : tr.jumps) {
    CHECK(j.before == j.after);
    CHECK(j.increment.isZero());
  }
}

TEST_CASE("doubling jumps on the integers give (2/e)^k", "[simulator]") {
  const auto s = scalar([](double, double x) { return -x; }, [](double x) { return x; });
  const auto tr = integrate(s, integers(8, 8.0), 0.0, v1(1.0), InputSignal::zero(0), 8.0,
                            Tolerances::tight());
  REQUIRE(tr.jumps.size() == 8);
  for (std::size_t k = 0; k < tr.jumps.size(); ++k) {
    CHECK(tr.jumps[k].t == static_cast<double>(k + 1));
    CHECK(tr.jumps[k].after[0] ==
          Approx(std::pow(2.0 / std::exp(1.0), static_cast<double>(k + 1))).epsilon(1e-9));
  }
  // Same numbers from the comparison solver with V = |x|.
  auto cmp = std::make_shared<const ComparisonSystem>(ComparisonSpec{
      FlowRate::constant(1.0), RateFunction("s", [](double s) { return s; }, RateClass::P),
      RateFunction::linear(2.0), Regime::Decay});
  const auto z = solve_comparison(cmp, integers(8, 8.0), 0.0, 1.0, 8.0);
  for (const auto& j : tr.jumps) CHECK(j.after[0] == Approx(z.at(j.t)).epsilon(1e-9));
  CHECK(tr.jumps_until(3.0) == 3);
  CHECK(tr.jumps_until(2.999) == 2);
}

TEST_CASE("jumps use the left limit and the input at the instant", "[simulator]") {
  ImpulsiveSystem s;
  s.n = 1;
  s.m = 1;
  s.f = [](double, const Vec& x, const Vec&) { return Vec::Zero(x.size()).eval(); };
  s.g = [](double, const Vec& x, const Vec& u) { return (x + u).eval(); };
  const auto u = InputSignal::impulse_only(v1(0.5), {1.0, 2.0});
  const auto tr = integrate(s, ImpulseSequence({1.0, 2.0}, 3.0), 0.0, v1(1.0), u, 3.0);
  REQUIRE(tr.jumps.size() == 2);
  CHECK(tr.jumps[0].after[0] == 2.5);  // 1 + (1 + 0.5)
  CHECK(tr.jumps[1].after[0] == 5.5);  // 2.5 + (2.5 + 0.5)
  CHECK(tr.final_state()[0] == 5.5);
}

TEST_CASE("no-jump map reproduces the plain ODE", "[simulator]") {
  const auto f = [](double t, double x) { return std::sin(t) - 0.3 * x; };
  const auto a = integrate(scalar(f, [](double) { return 0.0; }), integers(5, 5.0), 0.0, v1(1.0),
                           InputSignal::zero(0), 5.0, Tolerances::tight());
  const auto b = integrate(scalar(f, [](double) { return 0.0; }), ImpulseSequence({}, 5.0), 0.0,
                           v1(1.0), InputSignal::zero(0), 5.0, Tolerances::tight());
  CHECK(a.final_state()[0] == Approx(b.final_state()[0]).epsilon(1e-9));
  // Closed form of ẋ = sin t − 0.3x, x(0) = 1.
  const double k = 0.3;
  const double t = 5.0;
  const double c = 1.0 + 1.0 / (1 + k * k);
  const double exact = (k * std::sin(t) - std::cos(t)) / (1 + k * k) + c * std::exp(-k * t);
  CHECK(b.final_state()[0] == Approx(exact).epsilon(1e-9));
}

TEST_CASE("tightening tolerances converges", "[simulator]") {
  const auto s = scalar([](double t, double x) { return -x * x * x + std::cos(3 * t); },
                        [](double x) { return -0.5 * x; });
  Tolerances loose;
  loose.atol = 1e-6;
  loose.rtol = 1e-6;
  Tolerances half = loose;
  half.atol /= 2;
  half.rtol /= 2;
  const auto g = integers(9, 10.0);
  const double a = integrate(s, g, 0.0, v1(2.0), InputSignal::zero(0), 10.0, loose).final_state()[0];
  const double b = integrate(s, g, 0.0, v1(2.0), InputSignal::zero(0), 10.0, half).final_state()[0];
  const double c = integrate(s, g, 0.0, v1(2.0), InputSignal::zero(0), 10.0, Tolerances::tight())
                       .final_state()[0];
  CHECK(std::abs(a - b) < 1e-5);
  CHECK(std::abs(b - c) < 1e-5);
}

TEST_CASE("finite escape truncates the run", "[simulator]") {
  // ẋ = x², x(0) = 1 escapes at t = 1.
  const auto s = scalar([](double, double x) { return x * x; }, [](double) { return 0.0; });
  const auto tr = integrate(s, ImpulseSequence({}, 3.0), 0.0, v1(1.0), InputSignal::zero(0), 3.0);
  CHECK(tr.truncated);
  CHECK(tr.t_end < 1.0);
  CHECK(tr.t_end > 0.99);
}

TEST_CASE("horizon clips impulses", "[simulator]") {
  const auto s = scalar([](double, double) { return 0.0; }, [](double x) { return x; });
  const auto tr =
      integrate(s, ImpulseSequence({1.0, 2.0, 3.0}, 5.0), 0.0, v1(1.0), InputSignal::zero(0), 2.0);
  CHECK(tr.jumps.size() == 2);
  CHECK(tr.final_state()[0] == 4.0);
}

TEST_CASE("input norm", "[simulator]") {
  const ImpulseSequence g({1.0, 2.0}, 3.0);
  CHECK(input_norm(InputSignal::constant(v1(-0.7)), g, 0.0, 2.0) == Approx(0.7));
  CHECK(input_norm(InputSignal::impulse_only(v1(1.0), {1.0, 2.0}), g, 0.0, 2.0) == 1.0);
  InputSignal s;
  s.dim = 1;
  s.eval = [](double t) { return Vec::Constant(1, std::sin(t)); };
  s.label = "sin";
  CHECK(input_norm(s, g, 0.0, 2.0) == Approx(1.0).margin(1e-7));
  // Interval excludes its left end.
  CHECK(input_norm(InputSignal::impulse_only(v1(1.0), {1.0}), ImpulseSequence({1.0}, 3.0), 1.0,
                   2.0) == 0.0);
}

TEST_CASE("ensemble results are deterministic and keep order", "[simulator]") {
  const auto& p = get_preset("example-5.1");
  std::vector<RunSpec> runs;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (double x0 : {-1.0, 0.5, 2.0}) {
      RunSpec r;
      r.seed = derive_seed(42, runs.size());
      r.gamma = make_adt(2, 1.25, r.seed, 20.0);
      r.x0 = v1(x0);
      r.u = InputSignal::zero(1);
      r.label = std::to_string(seed);
      runs.push_back(std::move(r));
    }
  }
  const auto a = ensemble(p.system, runs, 20.0, {}, 1);
  const auto b = ensemble(p.system, runs, 20.0, {}, 4);
  REQUIRE(a.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].error.empty());
    REQUIRE(b[i].error.empty());
    CHECK(trajectory_csv(*a[i].trajectory) == trajectory_csv(*b[i].trajectory));
  }
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
}

TEST_CASE("validate rejects mismatched dimensions", "[simulator]") {
  auto s = scalar([](double, double x) { return x; }, [](double x) { return x; });
  s.n = 2;
  CHECK_THROWS_AS(s.validate(), ValidationError);
}
