#include <catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "iiss/analysis.hpp"
#include "iiss/errors.hpp"
#include "iiss/presets.hpp"

using namespace iiss;
using Catch::Approx;

namespace {

std::shared_ptr<const ComparisonSystem> linear_decay() {
  return std::make_shared<const ComparisonSystem>(ComparisonSpec{
      FlowRate::constant(1.0),
      RateFunction("s", [](double s) { return s; }, RateClass::P)
          .with_reciprocal_antiderivative([](double r) { return std::log(r); },
                                          [](double y) { return std::exp(y); }),
      RateFunction::identity(), Regime::Decay});
}

std::shared_ptr<const ComparisonSystem> system51() {
  return std::make_shared<const ComparisonSystem>(
      ComparisonSpec::from_candidate(get_preset("example-5.1").candidate));
}

MeasuredRun synthetic(std::vector<double> t, std::vector<double> h, std::vector<std::size_t> n) {
  MeasuredRun r;
  r.label = "synthetic";
  r.h0 = h.front();
  r.t = std::move(t);
  r.h = std::move(h);
  r.jumps = std::move(n);
  return r;
}

std::vector<MeasuredRun> decay_runs(const std::vector<double>& z0s, double horizon) {
  std::vector<MeasuredRun> runs;
  for (double z0 : z0s) {
    runs.push_back(measure(solve_comparison(linear_decay(), ImpulseSequence({}, horizon), 0.0, z0,
                                            horizon),
                           0.01));
  }
  return runs;
}

}  // namespace

TEST_CASE("constant-zero run gives a zero envelope", "[analysis]") {
  const auto r = synthetic({0, 1, 2, 3}, {0, 0, 0, 0}, {0, 0, 0, 0});
  const auto env = build_envelope({r}, {.bins = 3});
  for (double v : env.overall()) CHECK(v == 0.0);
  CHECK(env.as_kl()(0.0, 1.5) == 0.0);
}

TEST_CASE("strong abscissa counts jumps", "[analysis]") {
  // Three jumps by t = 2 put the last sample at abscissa 5.
  const auto r = synthetic({0, 1, 2}, {1.0, 0.5, 0.25}, {0, 1, 3});
  const auto weak = build_envelope({r}, {.mode = AbscissaMode::Weak, .bins = 10});
  const auto strong = build_envelope({r}, {.mode = AbscissaMode::Strong, .bins = 10});
  CHECK(weak.bin_edges.back() == 2.0);
  CHECK(strong.bin_edges.back() == 5.0);
  CHECK(strong.sup[0][9] == 0.25);
}

TEST_CASE("empirical envelope as a KL function", "[analysis]") {
  const auto runs = decay_runs({0.5, 1.0, 2.0}, 5.0);
  const auto env = build_envelope(runs, {.bins = 50, .h0_edges = {0.5, 1.0, 2.0}});
  const auto beta = env.as_kl();
  CHECK(beta(2.0, 0.0) == Approx(2.0));
  CHECK(beta(1.0, 0.0) == Approx(1.0));
  CHECK(beta(0.3, 0.0) == Approx(0.5));
  CHECK(std::isinf(beta(3.0, 0.0)));
  CHECK(beta(2.0, 4.0) <= beta(2.0, 1.0));
  CHECK(env.decay.decaying);
  CHECK(guas_check(runs, beta, AbscissaMode::Weak).pass);
}

TEST_CASE("decay ensemble envelope is nonincreasing window over window", "[analysis]") {
  const auto sys = system51();
  const auto env = build_envelope_prop1(
      sys, {std::log(2.0) + 0.5, 1.25, 1.25, [](double e) { return 2.0 / e; }, {}});
  const double H = 6 * env.T0;
  std::vector<MeasuredRun> runs;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    runs.push_back(measure(solve_comparison(sys, make_adt(2, 1.25, seed, H), 0.0, 1.0, H), 0.05));
  }
  const auto est = build_envelope(runs, {.bins = 6, .max_abscissa = H});
  const auto sup = est.overall();
  for (std::size_t j = 2; j < sup.size(); ++j) CHECK(sup[j] <= sup[j - 1]);
}

TEST_CASE("sign test", "[analysis]") {
  std::vector<double> dec;
  for (int i = 0; i < 20; ++i) dec.push_back(20.0 - i);
  const auto d = sign_test(dec);
  CHECK(d.decreases == 19);
  CHECK(d.p_value == Approx(std::pow(0.5, 19)));
  CHECK(d.decaying);
  const auto f = sign_test({1, 2, 1, 2, 1, 2, 1});
  CHECK_FALSE(f.decaying);
  CHECK(sign_test({3, 3, 3}).p_value == 1.0);
}

TEST_CASE("KL bound checks", "[analysis]") {
  const auto zero = synthetic({0, 1, 2}, {0, 0, 0}, {0, 0, 0});
  const KLFunction exp_kl("r e^-s", [](double r, double s) { return r * std::exp(-s); });
  CHECK(guas_check({zero}, exp_kl, AbscissaMode::Weak).pass);
  // Exact solution of ż = −z meets r e^{−s} with equality.
  const auto runs = decay_runs({1.0}, 4.0);
  const auto rep = guas_check(runs, exp_kl, AbscissaMode::Weak);
  CHECK(rep.pass);
  CHECK(rep.worst_margin == Approx(0.0).margin(1e-12));
  const KLFunction tight("r e^-2s", [](double r, double s) { return r * std::exp(-2 * s); });
  const auto bad = guas_check(runs, tight, AbscissaMode::Weak);
  CHECK_FALSE(bad.pass);
  CHECK(bad.worst_t > 0.0);
}

TEST_CASE("uniform stability checks", "[analysis]") {
  const auto runs = decay_runs({0.5, 1.0, 2.0}, 3.0);
  CHECK(check_gus(runs, RateFunction::identity()).pass);
  auto grow = synthetic({0, 1, 2}, {1.0, 1.5, 3.0}, {0, 0, 0});
  auto all = runs;
  all.push_back(grow);
  const auto rep = check_gus(all, RateFunction::identity());
  CHECK_FALSE(rep.pass);
  CHECK(rep.worst_run == 3);
  CHECK(rep.worst_t == 2.0);
  CHECK(rep.worst_margin == Approx(-2.0));
}

TEST_CASE("eta bounds the comparison ensemble", "[analysis]") {
  const auto sys = system51();
  const auto env = build_envelope_prop1(
      sys, {std::log(2.0) + 0.5, 1.25, 1.25, [](double e) { return 2.0 / e; }, {}});
  std::vector<MeasuredRun> runs;
  std::uint64_t seed = 11;
  for (double z0 : {1e-6, 1e-4, 0.1, 1.0}) {
    runs.push_back(measure(solve_comparison(sys, make_adt(2, 1.25, seed++, 300.0), 0.0, z0, 300.0),
                           0.05));
  }
  const auto rep = check_gus(runs, env.eta);
  CHECK(rep.pass);
  CHECK(rep.checked > rep.vacuous);
}

TEST_CASE("attractivity times", "[analysis]") {
  const auto runs = decay_runs({0.25, 0.5, 1.0}, 5.0);
  const auto tab = estimate_attractivity(runs, {std::exp(-2.0), 1.0}, {1.0}, 0.01);
  REQUIRE(tab.entries.size() == 2);
  REQUIRE(tab.entries[0].T.has_value());
  CHECK(*tab.entries[0].T == Approx(2.0).margin(0.011));
  CHECK(tab.entries[0].runs == 3);
  REQUIRE(tab.entries[1].T.has_value());
  CHECK(*tab.entries[1].T == 0.0);
  const auto never = estimate_attractivity(runs, {1e-6}, {1.0}, 0.01);
  CHECK_FALSE(never.entries[0].T.has_value());
  CHECK(never.csv().find("not-attained") != std::string::npos);
}

TEST_CASE("monotone regression", "[analysis]") {
  const auto y = pava_nondecreasing({1, 3, 2, 4});
  CHECK(y == std::vector<double>{1, 2.5, 2.5, 4});
  CHECK(pava_nondecreasing({3, 2, 1}) == std::vector<double>{2, 2, 2});
  CHECK(pava_nondecreasing({}).empty());
}

TEST_CASE("ISS gain of the destabilizing example", "[analysis]") {
  const auto& p = get_preset("example-5.1");
  GainSpec spec;
  spec.sequences = {make_adt(2, 1.25, 3, 40.0), make_adt(2, 1.25, 4, 40.0)};
  spec.x0s = {Vec::Constant(1, 0.5), Vec::Constant(1, -0.5)};
  spec.horizon = 40.0;
  const auto g = iss_gain(p.system, spec, {0.0, 0.1, 0.2, 0.4});
  REQUIRE(g.amplitude.size() == 4);
  CHECK(g.raw[0] == Approx(0.0).margin(1e-9));
  for (double v : g.raw) CHECK(std::isfinite(v));
  for (std::size_t i = 1; i < g.regressed.size(); ++i) CHECK(g.regressed[i] >= g.regressed[i - 1]);
  CHECK(g(0.0) == g.regressed[0]);
  CHECK(g(10.0) == g.regressed.back());
}
