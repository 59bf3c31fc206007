#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "iiss/comparison.hpp"
#include "iiss/errors.hpp"
#include "iiss/presets.hpp"
#include "rk4.hpp"

using namespace iiss;
using Catch::Approx;

namespace {

std::shared_ptr<const ComparisonSystem> make(RateFunction phi, RateFunction psi, FlowRate p,
                                             Regime regime) {
  return std::make_shared<const ComparisonSystem>(
      ComparisonSpec{std::move(p), std::move(phi), std::move(psi), regime});
}

RateFunction lin() {
  return RateFunction("s", [](double s) { return s; }, RateClass::P)
      .with_reciprocal_antiderivative([](double r) { return std::log(r); },
                                      [](double y) { return std::exp(y); });
}

RateFunction lin_numeric() { return RateFunction("s", [](double s) { return s; }, RateClass::P); }

std::shared_ptr<const ComparisonSystem> preset_system(const std::string& name) {
  return std::make_shared<const ComparisonSystem>(
      ComparisonSpec::from_candidate(get_preset(name).candidate));
}

}  // namespace

TEST_CASE("flow transform closed forms and range endpoints", "[comparison]") {
  FlowTransform F(lin());
  CHECK(F(1.0) == 0.0);
  CHECK(F(std::exp(2.0)) == Approx(2.0));
  CHECK(std::isinf(F.lower()));
  CHECK(std::isinf(F.upper()));
  const auto& p = get_preset("example-5.1");
  FlowTransform G(p.candidate.phi);
  CHECK(G.upper() == Approx(1.0).epsilon(1e-12));
  CHECK(G.lower() == -std::numeric_limits<double>::infinity());
  FlowTransform S(RateFunction("sqrt", [](double s) { return std::sqrt(s); }, RateClass::P));
  CHECK(S.lower() == Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("flow transform inverse round-trips on probes", "[comparison]") {
  for (const auto& rate : {lin_numeric(), get_preset("example-5.1").candidate.phi,
                           RateFunction("s+s^3", [](double s) { return s + s * s * s; })}) {
    FlowTransform F(rate);
    for (double r : {1e-8, 1e-3, 0.3, 1.0, 2.5, 40.0}) {
      CHECK(F.inverse(F(r)) == Approx(r).epsilon(1e-10));
    }
  }
}

TEST_CASE("flow_solution closed forms", "[comparison]") {
  const auto sys = make(lin(), RateFunction::identity(), FlowRate::constant(1.0), Regime::Decay);
  CHECK(flow_solution(*sys, 0.0, 1.0, 1.0) == Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(flow_solution(*sys, 3.0, 0.0, 7.0) == 0.0);
  const auto g = preset_system("example-5.2");
  // Growth with −φ = tanh, p ≡ 1: ln sinh w − ln sinh 1 = 1.
  const auto one = make(get_preset("example-5.2").candidate.phi, RateFunction::identity(),
                        FlowRate::constant(1.0), Regime::Growth);
  const double w = flow_solution(*one, 0.0, 1.0, 1.0);
  CHECK(w == Approx(std::asinh(std::exp(1.0) * std::sinh(1.0))).epsilon(1e-12));
  CHECK(w == Approx(1.8782).margin(1e-4));
  const double rk = test::rk4_scalar([](double, double z) { return std::tanh(z); }, 0.0, 1.0, 1.0,
                                     1e-4);
  CHECK(w == Approx(rk).epsilon(1e-10));
  CHECK(flow_solution(*g, 0.0, 0.0, 5.0) == 0.0);
}

TEST_CASE("finite escape in the growth regime carries a bracket", "[comparison]") {
  // ż = z² escapes at t* = 1/z0.
  const auto sys = make(RateFunction("s^2", [](double s) { return s * s; }, RateClass::P),
                        RateFunction::identity(), FlowRate::constant(1.0), Regime::Growth);
  CHECK(flow_solution(*sys, 0.0, 2.0, 0.25) == Approx(4.0).epsilon(1e-9));
  try {
    (void)flow_solution(*sys, 0.0, 2.0, 1.0);
    FAIL("expected EscapeError");
  } catch (const EscapeError& e) {
    CHECK(e.bracket_lo() <= 0.5);
    CHECK(e.bracket_hi() >= 0.5);
    CHECK(e.bracket_hi() - e.bracket_lo() < 1e-6);
  }
}

TEST_CASE("absorption at zero in finite time", "[comparison]") {
  // ż = −√z reaches 0 at t = 2√z0.
  const auto sys = make(RateFunction("sqrt", [](double s) { return std::sqrt(s); }, RateClass::P),
                        RateFunction::identity(), FlowRate::constant(1.0), Regime::Decay);
  CHECK(flow_solution(*sys, 0.0, 1.0, 1.0) == Approx(0.25).epsilon(1e-8));
  CHECK(flow_solution(*sys, 0.0, 1.0, 2.5) == 0.0);
  const auto z = solve_comparison(sys, ImpulseSequence({3.0, 4.0}, 10.0), 0.0, 1.0, 10.0);
  CHECK(z.at(5.0) == 0.0);
  CHECK(z.at(10.0) == 0.0);
}

TEST_CASE("solve_comparison: doubling jumps at the integers give (2/e)^k", "[comparison]") {
  const auto sys = make(lin(), RateFunction::linear(2.0), FlowRate::constant(1.0), Regime::Decay);
  std::vector<double> ints;
  for (int k = 1; k <= 10; ++k) ints.push_back(k);
  const auto z = solve_comparison(sys, ImpulseSequence(ints, 10.0), 0.0, 1.0, 10.0);
  for (int k = 1; k <= 10; ++k) {
    CHECK(z.at(k) == Approx(std::pow(2.0 / std::exp(1.0), k)).epsilon(1e-12));
  }
  CHECK(z.jumps_until(3.5) == 3);
  CHECK(z.jumps_until(0.5) == 0);
  // Right-continuity and left limits.
  CHECK(z.segments()[1].start == 1.0);
  CHECK(z.segments()[0].z_end == Approx(std::exp(-1.0)));
}

TEST_CASE("solve_comparison without impulses matches the flow", "[comparison]") {
  const auto sys = preset_system("example-5.1");
  const auto z = solve_comparison(sys, ImpulseSequence({}, 20.0), 0.0, 3.0, 20.0);
  for (double t : {0.0, 0.5, 2.0, 7.5, 20.0}) {
    CHECK(z.at(t) == Approx(flow_solution(*sys, 0.0, 3.0, t)).epsilon(1e-9));
  }
}

TEST_CASE("stabilizing example: post-jump values decrease under dwell 0.8", "[comparison]") {
  const auto sys = preset_system("example-5.2");
  std::vector<double> inst;
  for (int k = 1; k <= 40; ++k) inst.push_back(0.8 * k);
  const auto z = solve_comparison(sys, ImpulseSequence(inst, 32.0), 0.0, 1.0, 32.0);
  double prev = z.at(0.0);
  for (int k = 1; k <= 40; ++k) {
    const double v = z.at(0.8 * k);
    if (prev > 0.0) {
      CHECK(v < prev);
    } else {
      CHECK(v == 0.0);
    }
    prev = v;
  }
}

TEST_CASE("flow monotonicity and order preservation", "[comparison]") {
  const auto dec = preset_system("example-5.1");
  const auto grow = preset_system("example-5.2");
  for (double t : {0.5, 1.0, 3.0}) {
    CHECK(flow_solution(*dec, 0.0, 2.0, t) <= flow_solution(*dec, 0.0, 2.0, t - 0.25));
    CHECK(flow_solution(*grow, 0.0, 2.0, t) >= flow_solution(*grow, 0.0, 2.0, t - 0.25));
    CHECK(flow_solution(*dec, 0.0, 1.0, t) <= flow_solution(*dec, 0.0, 1.5, t));
  }
}

TEST_CASE("jump recursion", "[comparison]") {
  const auto w = jump_recursion(RateFunction::linear(0.5), 1.0, 4);
  REQUIRE(w.size() == 5);
  CHECK(w[4] == 0.0625);
  for (double v : jump_recursion(RateFunction::linear(0.5), 0.0, 6)) CHECK(v == 0.0);
  const auto& psi = get_preset("example-5.2").candidate.psi;
  const auto o = jump_recursion(psi, 4.0, 3);
  CHECK(o[1] == Approx(std::cbrt(4.0) / 2).epsilon(1e-14));
  CHECK(o[1] == Approx(0.7937).margin(1e-4));
  CHECK(o[2] == Approx(0.25).margin(1e-3));
  CHECK(o[3] == Approx(std::pow(o[2], 3) / 2).epsilon(1e-14));
}

TEST_CASE("decay envelope constants", "[comparison]") {
  const auto sys = preset_system("example-5.1");
  const double M = std::log(2.0) + 0.5;
  const auto env = build_envelope_prop1(sys, {M, 1.25, 1.25, [](double e) { return 2.0 / e; }, {}});
  CHECK(env.delta == Approx(0.0569).margin(1e-4));
  CHECK(env.eps0 == Approx(0.0191).margin(1e-4));
  CHECK(env.T_eps0 == Approx(104.9).margin(0.05));
  CHECK(env.m0 == 84);
  CHECK(env.T0 == 105.0);
  CHECK(env.k0 == 86);

  const auto toy = build_envelope_prop1(nullptr, {0.5, 1.0, 1.0, [](double e) { return 1.0 / e; }, {}});
  CHECK(toy.delta == 0.5);
  CHECK(toy.eps0 == 0.5);
  CHECK(toy.m0 == 2);
  CHECK(toy.T0 == 2.0);
  CHECK(toy.k0 == 3);
  CHECK_THROWS_AS(build_envelope_prop1(sys, {1.3, 1.25, 1.25, [](double e) { return 2.0 / e; }, {}}),
                  PreconditionError);
}

TEST_CASE("eta is the k0-fold jump majorant", "[comparison]") {
  const auto sys = make(lin(), RateFunction::linear(1.5), FlowRate::constant(1.0), Regime::Decay);
  const auto env =
      build_envelope_prop1(sys, {std::log(1.5), 1.0, 1.0, [](double e) { return 1.0 / e; }, {}});
  CHECK(env.eta(1.0) == Approx(std::pow(1.5, static_cast<double>(env.k0))).epsilon(1e-12));
}

TEST_CASE("growth envelope constants and beta3 shape", "[comparison]") {
  const auto sys = preset_system("example-5.2");
  const double M2 = std::log(1.0 + std::exp(1.0)) - 0.5;
  const auto env = build_envelope_prop2(sys, {M2, 0.8, 0.8, [](double e) { return 1.0 / e; }, {}});
  CHECK(env.delta == Approx(0.0133).margin(1e-4));
  CHECK(env.T0 == Approx(0.8 * static_cast<double>(env.m0)));
  CHECK(static_cast<double>(env.m0 - 1) * 0.8 < env.T_eps0);
  CHECK(env.k0 == static_cast<std::size_t>(std::ceil((1.25 - env.eps0) * env.T0)));
  for (double r : {0.1, 1.0, 3.0}) {
    CHECK(env.beta3(r, 0.0) == Approx(2.0 * env.nu(r)).epsilon(1e-12));
    const double k = static_cast<double>(env.k0);
    CHECK(env.beta3(r, k) == Approx(env.beta2(r, 0.0)).epsilon(1e-12));
    CHECK(env.beta3(r, std::nextafter(k, 0.0)) == Approx(env.beta2(r, 0.0)).epsilon(1e-9));
  }
  CHECK(env.beta3(0.0, 5.0) == 0.0);
  double prev_s = std::numeric_limits<double>::infinity();
  for (double s = 0.0; s < 2000.0; s += 37.0) {
    const double v = env.beta3(1.0, s);
    CHECK(v <= prev_s);
    prev_s = v;
  }
  double prev_r = 0.0;
  for (double r = 0.05; r < 5.0; r += 0.25) {
    const double v = env.beta3(r, 300.0);
    CHECK(v >= prev_r);
    prev_r = v;
  }
  CHECK(verify_kl(env.beta3_kl(), {0.0, 0.1, 0.5, 1.0, 2.0}, {0.0, 10.0, 100.0, 500.0}).consistent());
}

TEST_CASE("window descent holds on the destabilizing example", "[comparison]") {
  const auto sys = preset_system("example-5.1");
  const auto env = build_envelope_prop1(
      sys, {std::log(2.0) + 0.5, 1.25, 1.25, [](double e) { return 2.0 / e; }, {}});
  const auto gamma = make_adt(2, 1.25, 7, 6 * env.T0);
  const auto z = solve_comparison(sys, gamma, 0.0, 1.0, 6 * env.T0);
  const auto rep = check_window_descent(z, env);
  CHECK(rep.pass);
  CHECK(rep.windows >= 1);
  CHECK(rep.worst_margin >= 0.0);
}
