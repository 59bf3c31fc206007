#include <catch_amalgamated.hpp>

#include <cmath>

#include "iiss/certificates.hpp"
#include "iiss/errors.hpp"
#include "iiss/presets.hpp"

using namespace iiss;
using Catch::Approx;

namespace {

RateFunction lin() { return RateFunction("s", [](double s) { return s; }, RateClass::P); }
RateFunction half() { return RateFunction("s/2", [](double s) { return 0.5 * s; }, RateClass::Kinf); }
RateFunction sq() { return RateFunction("s^2", [](double s) { return s * s; }, RateClass::P); }

LyapunovCandidate toy(RateFunction phi, RateFunction psi, Regime regime) {
  LyapunovCandidate c;
  c.name = "toy";
  c.V = [](double, const Vec& x) { return x.norm(); };
  c.phi = std::move(phi);
  c.psi = std::move(psi);
  c.p = FlowRate::constant(1.0);
  c.regime = regime;
  return c;
}

// Closed form of ∫_a^{ψ(a)} ds/φ for the destabilizing example, by cases.
double m51_integral(double a) {
  const double pa = a + 4 * a * a + 4 * a * a * a;
  if (pa <= 1.0) return std::log(pa / a);
  if (a >= 1.0) return 1.0 / a - 1.0 / pa;
  return std::log(1.0 / a) + 1.0 - 1.0 / pa;
}

}  // namespace

TEST_CASE("M for the destabilizing example matches the published constant", "[certificates]") {
  const auto& p = get_preset("example-5.1");
  const auto M = compute_M(p.candidate.phi, p.candidate.psi);
  CHECK(M.value == Approx(1.1931).margin(2e-3));
  CHECK(M.arg == Approx(0.5).margin(0.05));
  CHECK_FALSE(M.boundary);
  // Independent oracle: the piecewise closed form at the maximizer.
  CHECK(M.value == Approx(m51_integral(0.5)).epsilon(1e-9));
  CHECK(m51_integral(0.5) == Approx(std::log(2.0) + 0.5).epsilon(1e-14));
  CHECK(M.value >= m51_integral(0.3));
  CHECK(M.value >= m51_integral(0.7));
}

TEST_CASE("M is zero for the identity jump and negative for contracting jumps",
          "[certificates]") {
  const auto zero = compute_M(lin(), RateFunction::identity());
  CHECK(zero.value == 0.0);
  const auto neg = compute_M(lin(), half());
  CHECK(neg.value == Approx(std::log(0.5)).epsilon(1e-9));
  CHECK_FALSE(neg.boundary);
}

TEST_CASE("M is monotone in psi", "[certificates]") {
  const auto& p = get_preset("example-5.1");
  RateFunction bigger("2psi", [&](double s) { return 2.0 * p.candidate.psi(s); }, RateClass::Kinf);
  CHECK(compute_M(p.candidate.phi, bigger).value >= compute_M(p.candidate.phi, p.candidate.psi).value);
}

TEST_CASE("boundary-attained suprema are flagged", "[certificates]") {
  // ∫_a^{2a} ds/s² = 1/(2a) grows without bound as a → 0.
  const auto r = compute_M(sq(), RateFunction::linear(2.0));
  CHECK(r.boundary);
  CHECK(r.arg == Approx(1e-6).epsilon(1e-6));
}

TEST_CASE("M2 for the stabilizing example matches ln(1+e) - 1/2", "[certificates]") {
  const auto& p = get_preset("example-5.2");
  const auto M2 = compute_M2(p.candidate.phi, p.candidate.psi);
  const double ref = std::log(1.0 + std::exp(1.0)) - 0.5;
  CHECK(ref == Approx(0.813261687).margin(1e-9));
  CHECK(M2.value == Approx(ref).margin(1e-8));
  CHECK(M2.arg == Approx(1.0).margin(1e-3));
}

TEST_CASE("M2 trivial cases", "[certificates]") {
  CHECK(compute_M2(lin(), half()).value == Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(compute_M2(lin(), RateFunction::identity()).value == 0.0);
}

TEST_CASE("window budgets N", "[certificates]") {
  const auto one = FlowRate::constant(1.0);
  CHECK(compute_N(one, 1.7, ExtremumMode::Inf).value == 1.7);
  CHECK(compute_N(one, 1.7, ExtremumMode::Sup).value == 1.7);
  const auto th = FlowRate::tanh_rate();
  const auto inf = compute_N(th, 0.8, ExtremumMode::Inf);
  const auto sup = compute_N(th, 0.8, ExtremumMode::Sup);
  CHECK(inf.value == Approx(std::log(std::cosh(0.8))).epsilon(1e-12));
  CHECK(inf.arg == 0.0);
  CHECK(sup.value == Approx(0.8).epsilon(1e-9));
  CHECK(std::isinf(sup.arg));
  CHECK(inf.value <= sup.value);
  CHECK_THROWS_AS(compute_N(one, 0.0, ExtremumMode::Inf), PreconditionError);
}

TEST_CASE("N over a periodic rate scans one period", "[certificates]") {
  FlowRate p;
  p.name = "1+sin^2";
  p.p = [](double t) { return 1.0 + std::sin(t) * std::sin(t); };
  p.hint = TailHint::Periodic;
  p.period = M_PI;
  // ∫_t^{t+θ} (1 + sin²) = 1.5θ − (sin(2(t+θ)) − sin(2t))/4, extremal at cos(2t+θ) = ±1.
  const double theta = 1.0;
  const auto inf = compute_N(p, theta, ExtremumMode::Inf);
  const auto sup = compute_N(p, theta, ExtremumMode::Sup);
  CHECK(inf.value == Approx(1.5 * theta - 0.5 * std::sin(theta)).epsilon(1e-9));
  CHECK(sup.value == Approx(1.5 * theta + 0.5 * std::sin(theta)).epsilon(1e-9));
}

TEST_CASE("N without a tail hint", "[certificates]") {
  FlowRate settled;
  settled.name = "bump";
  settled.p = [](double t) { return 1.0 + std::exp(-t); };
  const auto r = compute_N(settled, 1.0, ExtremumMode::Sup);
  CHECK(r.value == Approx(1.0 + (1.0 - std::exp(-1.0))).epsilon(1e-9));
  CHECK_FALSE(r.warnings.empty());
  FlowRate growing;
  growing.name = "t";
  growing.p = [](double t) { return t; };
  CHECK_THROWS_AS(compute_N(growing, 1.0, ExtremumMode::Sup), InconclusiveError);
}

TEST_CASE("escape integral classifier", "[certificates]") {
  const auto& p = get_preset("example-5.2");
  CHECK(check_escape_integral(p.candidate.phi).verdict == EscapeVerdict::DivergentConsistent);
  const auto conv = check_escape_integral(sq());
  CHECK(conv.verdict == EscapeVerdict::Convergent);
  CHECK(conv.limit == Approx(1.0).margin(1e-6));
  CHECK(check_escape_integral(lin()).verdict == EscapeVerdict::DivergentConsistent);
  EscapeProbe declared;
  declared.declared_divergent = true;
  CHECK(check_escape_integral(sq(), declared).verdict == EscapeVerdict::DeclaredDivergent);
}

TEST_CASE("decay-regime verdict cases", "[certificates]") {
  const auto& p = get_preset("example-5.1");
  const auto a = theorem1_verdict(p.candidate, 1.25);
  CHECK(a.theorem == TheoremCase::Thm1a);
  CHECK(a.strength == Strength::Strong);
  CHECK(a.class_kind == "Sup");
  CHECK(a.class_rho == Approx(0.8));
  CHECK(a.N == 1.25);

  const auto fail = theorem1_verdict(p.candidate, 1.1);
  CHECK(fail.theorem == TheoremCase::Inconclusive);

  const auto b = theorem1_verdict(toy(lin(), RateFunction::identity(), Regime::Decay), 1.0);
  CHECK(b.theorem == TheoremCase::Thm1b);
  CHECK(b.strength == Strength::Weak);
  CHECK(b.M == 0.0);

  const auto c = theorem1_verdict(toy(lin(), half(), Regime::Decay), 1.0);
  CHECK(c.theorem == TheoremCase::Thm1c);
  CHECK(c.M == Approx(-std::log(2.0)).epsilon(1e-9));

  const auto wrong = theorem1_verdict(toy(lin(), half(), Regime::Growth), 1.0);
  CHECK_FALSE(wrong.conclusive());
}

TEST_CASE("growth-regime verdict cases", "[certificates]") {
  const auto& p = get_preset("example-5.2");
  const auto ok = theorem2_verdict(p.candidate, 0.8);
  CHECK(ok.theorem == TheoremCase::Thm2);
  CHECK(ok.class_kind == "Sdn");
  CHECK(ok.class_rho == Approx(1.25));
  REQUIRE(ok.escape.has_value());
  CHECK(ok.escape->verdict == EscapeVerdict::DivergentConsistent);
  CHECK(theorem2_verdict(p.candidate, 0.9).theorem == TheoremCase::Inconclusive);

  const auto conv = theorem2_verdict(toy(sq(), half(), Regime::Growth), 0.01);
  CHECK(conv.theorem == TheoremCase::Inconclusive);
  REQUIRE(conv.escape.has_value());
  CHECK(conv.escape->verdict == EscapeVerdict::Convergent);
}

TEST_CASE("verdicts are deterministic", "[certificates]") {
  const auto& p = get_preset("example-5.1");
  const auto a = theorem1_verdict(p.candidate, 1.25);
  const auto b = theorem1_verdict(p.candidate, 1.25);
  CHECK(a.M == b.M);
  CHECK(a.a_star == b.a_star);
}

TEST_CASE("validate_candidate finds no violations for the shipped presets", "[certificates]") {
  for (const auto& name : preset_names()) {
    const auto& p = get_preset(name);
    const auto rep = validate_candidate(p.candidate, p.system);
    INFO(name);
    CHECK(rep.clean());
    CHECK(rep.points > 0);
    CHECK(rep.worst_margin_bi > -1e-6);
    CHECK(rep.worst_margin_bii > -1e-6);
  }
}

TEST_CASE("validate_candidate: the stabilizing example sits on the b-i equality",
          "[certificates]") {
  const auto& p = get_preset("example-5.2");
  const auto rep = validate_candidate(p.candidate, p.system);
  CHECK(std::abs(rep.worst_margin_bi) < 1e-6);
}

TEST_CASE("validate_candidate trivial zero dynamics", "[certificates]") {
  ImpulsiveSystem sys;
  sys.n = 1;
  sys.m = 1;
  sys.f = [](double, const Vec& x, const Vec&) { return Vec::Zero(x.size()).eval(); };
  sys.g = sys.f;
  auto c = toy(sq(), RateFunction::identity(), Regime::Decay);
  c.p = FlowRate::constant(0.0);
  c.chi = RateFunction::identity();
  c.pi = RateFunction::identity();
  CHECK(validate_candidate(c, sys).clean());
}

TEST_CASE("validate_candidate reports a wrong flow claim with a witness", "[certificates]") {
  const auto& p = get_preset("example-5.1");
  auto c = p.candidate;
  c.p = FlowRate::constant(3.0);  // claims three times the actual decay
  const auto rep = validate_candidate(c, p.system);
  REQUIRE_FALSE(rep.clean());
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.condition == "b-i") {
      found = true;
      CHECK(v.margin() < 0.0);
    }
  }
  CHECK(found);
}
