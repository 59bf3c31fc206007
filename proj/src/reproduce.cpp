#include "iiss/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "iiss/analysis.hpp"
#include "iiss/certificates.hpp"
#include "iiss/comparison.hpp"
#include "iiss/errors.hpp"
#include "iiss/io.hpp"
#include "iiss/parallel.hpp"
#include "iiss/presets.hpp"
#include "iiss/reports.hpp"
#include "iiss/sequences.hpp"

namespace iiss::reproduce {

namespace fs = std::filesystem;

bool BundleReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string BundleReport::summary_json() const {
  nlohmann::ordered_json j;
  j["bundle"] = name;
  j["pass"] = pass();
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  j["files"] = files;
  return j.dump(2) + "\n";
}

namespace {

using io::format_double;

std::string fmt(double v) { return format_double(v); }

// Collects checks and artifacts for one bundle directory.
class Bundle {
 public:
  Bundle(std::string name, fs::path dir) : dir_(std::move(dir)) {
    report_.name = std::move(name);
    fs::create_directories(dir_);
  }

  void check(std::string name, bool pass, std::string detail) {
    report_.checks.push_back({std::move(name), pass, std::move(detail)});
  }

  void write(const std::string& file, const std::string& content) {
    io::write_text(dir_ / file, content);
    report_.files.push_back(file);
  }

  BundleReport finish() {
    io::write_text(dir_ / "summary.json", report_.summary_json());
    return report_;
  }

 private:
  fs::path dir_;
  BundleReport report_;
};

reports::Context context_for(const Preset& p, const BundleOptions& o, double horizon) {
  return {p.name, p.hash, o.seed, o.tol, horizon};
}

VerdictOptions verdict_options(int threads) {
  VerdictOptions v;
  v.search.threads = threads;
  return v;
}

// Comparison runs, parallel over (sequence, z0) pairs and kept in index order.
std::vector<ComparisonTrajectory> comparison_ensemble(
    const std::shared_ptr<const ComparisonSystem>& sys, const std::vector<ImpulseSequence>& seqs,
    const std::vector<double>& z0s, double horizon, int threads) {
  const std::size_t n = seqs.size() * z0s.size();
  std::vector<std::optional<ComparisonTrajectory>> tmp(n);
  parallel_for(n, threads, [&](std::size_t i) {
    tmp[i].emplace(solve_comparison(sys, seqs[i / z0s.size()], 0.0, z0s[i % z0s.size()], horizon));
  });
  std::vector<ComparisonTrajectory> out;
  out.reserve(n);
  for (auto& t : tmp) out.push_back(std::move(*t));
  return out;
}

// First time from which z stays at or below `level` (checked on the
// segment ends, which carry every local maximum of a monotone flow).
std::optional<double> reach_time(const ComparisonTrajectory& z, double level) {
  std::optional<double> t;
  for (const auto& s : z.segments()) {
    if (std::max(s.z_start, s.z_end) > level) {
      t.reset();
    } else if (!t) {
      t = s.start;
    }
  }
  return t;
}

std::string run_label(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

struct SystemRuns {
  std::vector<RunResult> results;
  std::vector<reports::ManifestEntry> manifest;
  std::size_t failures = 0;
};

SystemRuns run_system(Bundle& b, const Preset& p, std::vector<RunSpec> specs, double horizon,
                      const BundleOptions& o, const std::string& prefix) {
  SystemRuns out;
  out.results = ensemble(p.system, specs, horizon, o.tol, o.threads);
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    const auto& r = out.results[i];
    reports::ManifestEntry e;
    e.label = r.spec.label;
    e.seed = r.spec.seed;
    e.t0 = r.spec.t0;
    e.x0.assign(r.spec.x0.data(), r.spec.x0.data() + r.spec.x0.size());
    if (!r.error.empty()) {
      e.status = r.error;
      ++out.failures;
    } else {
      e.status = r.trajectory->truncated ? "truncated" : "ok";
      e.jumps = r.trajectory->jumps.size();
      const auto traj = prefix + "traj_" + run_label(i) + ".csv";
      const auto jumps = prefix + "jumps_" + run_label(i) + ".csv";
      b.write(traj, trajectory_csv(*r.trajectory));
      b.write(jumps, jumps_csv(*r.trajectory));
      e.files = {traj, jumps};
    }
    out.manifest.push_back(std::move(e));
  }
  return out;
}

double final_abs(const Trajectory& tr) { return tr.final_state().cwiseAbs().maxCoeff(); }

// Largest V(t, x(t)) − z(t) excess over the allowed slack, sampled at every
// stored state (jump samples use the post-jump value on both sides).
double comparison_excess(const Trajectory& tr, const LyapunovCandidate& cand,
                         const ComparisonTrajectory& z) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : tr.samples) {
    const double v = cand.V(s.t, s.x);
    const double zt = z.at(s.t);
    worst = std::max(worst, v - zt - 1e-6 - 1e-3 * zt);
  }
  return worst;
}

BundleReport example51(const fs::path& dir, const BundleOptions& o) {
  Bundle b("example-5.1", dir);
  const auto& p = get_preset("example-5.1");
  const auto vopt = verdict_options(o.threads);

  const auto M = compute_M(p.candidate.phi, p.candidate.psi, vopt.search);
  b.check("M", std::abs(M.value - 1.1931) <= 2e-3 && M.arg >= 0.45 && M.arg <= 0.55,
          "M = " + fmt(M.value) + " at a* = " + fmt(M.arg));
  const auto verdict = theorem1_verdict(p.candidate, p.theta, vopt);
  b.write("verdict.json", reports::verdict_json(verdict, context_for(p, o, 0.0)));
  b.check("verdict", verdict.theorem == TheoremCase::Thm1a && verdict.class_kind == "Sup",
          to_string(verdict.theorem) + " over " + verdict.class_kind + "(" +
              fmt(verdict.class_rho) + ")");

  const auto cand = validate_candidate(p.candidate, p.system);
  b.write("candidate_validation.json", reports::candidate_json(cand, context_for(p, o, 0.0)));
  b.check("candidate", cand.clean(),
          std::to_string(cand.violations.size()) + " violations on " +
              std::to_string(cand.points) + " points");

  // Envelope constants with the ADT witness T(ε) = n₀/ε.
  auto sys = std::make_shared<const ComparisonSystem>(ComparisonSpec::from_candidate(p.candidate));
  const auto env = build_envelope_prop1(
      sys, {verdict.M, verdict.N, p.theta, [](double e) { return 2.0 / e; }, {}});
  const double H = 50.0 * env.T0;
  b.write("envelope.json", reports::envelope_json(env, context_for(p, o, H)));

  std::vector<ImpulseSequence> seqs;
  for (std::uint64_t k = 0; k < 100; ++k) seqs.push_back(make_adt(2, 1.25, derive_seed(o.seed, k), H));
  const std::vector<double> z0s{0.5, 1.0, 4.0};
  const auto zs = comparison_ensemble(sys, seqs, z0s, H, o.threads);
  io::CsvTable runs({"run", "seed", "z0", "windows", "worst_descent_margin", "t_reach_1e-3",
                     "final_z"});
  std::vector<MeasuredRun> measured;
  bool descent_ok = true;
  bool reach_ok = true;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto d = check_window_descent(zs[i], env);
    const auto t = reach_time(zs[i], 1e-3);
    descent_ok = descent_ok && d.pass;
    reach_ok = reach_ok && t.has_value();
    runs.add_row(std::vector<std::string>{
        std::to_string(i), std::to_string(derive_seed(o.seed, i / z0s.size())),
        fmt(z0s[i % z0s.size()]), std::to_string(d.windows), fmt(d.worst_margin),
        t ? fmt(*t) : "not-attained", fmt(zs[i].at(H))});
    measured.push_back(measure(zs[i], env.T0 / 20.0));
  }
  b.write("comparison_runs.csv", runs.text());
  b.check("window-descent", descent_ok, "every window of length T0 drops F by >= m0*delta/2");
  b.check("comparison-attractivity", reach_ok, "all runs reach z <= 1e-3 before 50*T0");
  const auto gus = check_gus(measured, env.eta);
  b.write("comparison_gus.json", reports::bound_json(gus));
  b.check("comparison-gus", gus.pass,
          "z <= eta(z0); " + std::to_string(gus.vacuous) + " of " + std::to_string(gus.checked) +
              " samples vacuous");
  const auto emp = build_envelope(measured, {.mode = AbscissaMode::Strong,
                                             .bins = 200,
                                             .h0_edges = z0s});
  b.write("comparison_envelope.csv", emp.csv());
  const auto strong = guas_check(measured, emp.as_kl(), AbscissaMode::Strong);
  b.check("comparison-strong-envelope", strong.pass && emp.decay.decaying,
          "sign-test p = " + fmt(emp.decay.p_value));

  // Full system under zero input against matched comparison runs.
  const double Hs = 30.0;
  std::vector<RunSpec> specs;
  const double x0s[] = {-2.0, -0.5, 0.5, 2.0};
  for (std::uint64_t k = 0; k < 50; ++k) {
    RunSpec r;
    r.seed = derive_seed(o.seed ^ 0x51ULL, k);
    r.gamma = make_adt(2, 1.25, r.seed, Hs);
    r.x0 = Vec::Constant(1, x0s[k % 4]);
    r.u = InputSignal::zero(1);
    r.label = "adt-" + std::to_string(k) + "-x0=" + fmt(x0s[k % 4]);
    specs.push_back(std::move(r));
  }
  auto sim = run_system(b, p, specs, Hs, o, "");
  b.write("manifest.json", reports::manifest_json(sim.manifest, context_for(p, o, Hs),
                                                  p.sequence_class.describe(), sim.failures));
  bool bound_ok = sim.failures == 0;
  bool decay_ok = sim.failures == 0;
  std::vector<MeasuredRun> sys_runs;
  for (const auto& r : sim.results) {
    if (!r.error.empty()) continue;
    const auto& tr = *r.trajectory;
    const double z0 = p.candidate.V(tr.t0, r.spec.x0);
    const auto z = solve_comparison(sys, r.spec.gamma, tr.t0, z0, Hs);
    bound_ok = bound_ok && comparison_excess(tr, p.candidate, z) <= 0.0;
    decay_ok = decay_ok && !tr.truncated && final_abs(tr) <= 1e-3;
    sys_runs.push_back(measure(tr, p.system));
  }
  b.check("comparison-principle", bound_ok, "V(x(t)) <= z(t) on every stored sample");
  b.check("system-decay", decay_ok, "all runs end with |x| <= 1e-3");
  const auto sys_env = build_envelope(sys_runs, {.bins = 60, .h0_edges = {0.5, 2.0}});
  b.write("system_envelope.csv", sys_env.csv());
  const auto attr = estimate_attractivity(sys_runs, {1e-1, 1e-2, 1e-3}, {0.5, 2.0}, 0.1);
  b.write("attractivity.csv", attr.csv());

  GainSpec gs;
  gs.sequences = {make_adt(2, 1.25, derive_seed(o.seed, 100), Hs),
                  make_adt(2, 1.25, derive_seed(o.seed, 101), Hs)};
  gs.x0s = {Vec::Constant(1, -0.5), Vec::Constant(1, 0.5)};
  gs.horizon = Hs;
  gs.tol = o.tol;
  gs.threads = o.threads;
  const auto gain = iss_gain(p.system, gs, {0.0, 0.05, 0.1, 0.2});
  b.write("gain.csv", gain.csv());
  b.check("gain", gain.raw.front() <= 1e-9 && std::isfinite(gain.raw.back()),
          "rho(0) = " + fmt(gain.raw.front()) + ", rho(0.2) = " + fmt(gain.raw.back()));
  return b.finish();
}

BundleReport example52(const fs::path& dir, const BundleOptions& o) {
  Bundle b("example-5.2", dir);
  const auto& p = get_preset("example-5.2");
  const auto vopt = verdict_options(o.threads);
  const double ref = std::log(1.0 + std::exp(1.0)) - 0.5;

  const auto M2 = compute_M2(p.candidate.phi, p.candidate.psi, vopt.search);
  b.check("M2", std::abs(M2.value - ref) <= 2e-3,
          "M2 = " + fmt(M2.value) + " at a* = " + fmt(M2.arg));
  const auto ok = theorem2_verdict(p.candidate, 0.8, vopt);
  const auto no = theorem2_verdict(p.candidate, 0.9, vopt);
  b.write("verdict.json", reports::verdict_json(ok, context_for(p, o, 0.0)));
  b.write("verdict_theta_0.9.json", reports::verdict_json(no, context_for(p, o, 0.0)));
  b.check("verdict", ok.theorem == TheoremCase::Thm2 && ok.class_kind == "Sdn",
          to_string(ok.theorem) + " over " + ok.class_kind + "(" + fmt(ok.class_rho) + ")");
  b.check("verdict-0.9", no.theorem == TheoremCase::Inconclusive, to_string(no.theorem));

  const auto cand = validate_candidate(p.candidate, p.system);
  b.write("candidate_validation.json", reports::candidate_json(cand, context_for(p, o, 0.0)));
  b.check("candidate", cand.clean(),
          std::to_string(cand.violations.size()) + " violations on " +
              std::to_string(cand.points) + " points");

  // Fixed dwell in [0.7, 0.8] lies in Sdn(1.25) with witness T(ε) = 1/ε.
  auto sys = std::make_shared<const ComparisonSystem>(ComparisonSpec::from_candidate(p.candidate));
  const auto env = build_envelope_prop2(sys, {ok.M, ok.N, 0.8, [](double e) { return 1.0 / e; }, {}});
  const double H = 60.0;
  b.write("envelope.json", reports::envelope_json(env, context_for(p, o, H)));

  std::vector<ImpulseSequence> seqs;
  for (std::uint64_t k = 0; k < 20; ++k) {
    seqs.push_back(make_fixed_dwell(0.7, 0.8, derive_seed(o.seed, k), H));
  }
  const std::vector<double> z0s{0.5, 1.0, 4.0};
  const auto zs = comparison_ensemble(sys, seqs, z0s, H, o.threads);
  std::vector<MeasuredRun> measured;
  bool reach_ok = true;
  io::CsvTable runs({"run", "seed", "z0", "t_reach_1e-3", "final_z"});
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto t = reach_time(zs[i], 1e-3);
    reach_ok = reach_ok && t.has_value();
    runs.add_row(std::vector<std::string>{std::to_string(i),
                                          std::to_string(derive_seed(o.seed, i / z0s.size())),
                                          fmt(z0s[i % z0s.size()]),
                                          t ? fmt(*t) : "not-attained", fmt(zs[i].at(H))});
    measured.push_back(measure(zs[i], 0.01));
  }
  b.write("comparison_runs.csv", runs.text());
  b.check("comparison-attractivity", reach_ok, "all runs reach z <= 1e-3 before t = 60");
  const auto fb = guas_check(measured, [&env](double r, double elapsed, double n) {
    return env.final_bound(r, elapsed, n);
  });
  b.write("comparison_final_bound.json", reports::bound_json(fb));
  b.check("comparison-final-bound", fb.pass,
          "z <= beta3(z0, n/2 + max{kappa(t - T0), 0}); worst margin " + fmt(fb.worst_margin));

  std::vector<RunSpec> specs;
  for (std::uint64_t k = 0; k < 2; ++k) {
    const auto seed = derive_seed(o.seed ^ 0x52ULL, k);
    for (double t0 : {0.0, 5.0}) {
      for (double x0 : {-2.0, -0.5, 0.5, 2.0}) {
        RunSpec r;
        r.seed = seed;
        r.gamma = make_fixed_dwell(0.7, 0.8, seed, H);
        r.t0 = t0;
        r.x0 = Vec::Constant(1, x0);
        r.u = InputSignal::zero(0);
        r.label = "dwell-" + std::to_string(k) + "-t0=" + fmt(t0) + "-x0=" + fmt(x0);
        specs.push_back(std::move(r));
      }
    }
  }
  auto sim = run_system(b, p, specs, H, o, "");
  b.write("manifest.json", reports::manifest_json(sim.manifest, context_for(p, o, H),
                                                  p.sequence_class.describe(), sim.failures));
  bool decay_ok = sim.failures == 0;
  for (const auto& r : sim.results) {
    decay_ok = decay_ok && r.error.empty() && !r.trajectory->truncated &&
               final_abs(*r.trajectory) <= 1e-3;
  }
  b.check("system-decay", decay_ok, "all runs end with |x| <= 1e-3 by t = 60");

  RunSpec free;
  free.gamma = ImpulseSequence({}, H, "none");
  free.x0 = Vec::Constant(1, 0.5);
  free.u = InputSignal::zero(0);
  free.label = "no-impulses";
  auto witness = run_system(b, p, {free}, H, o, "no_impulses_");
  bool grows = witness.failures == 0;
  if (grows) {
    const auto& tr = *witness.results[0].trajectory;
    double prev = 0.0;
    for (const auto& s : tr.samples) {
      grows = grows && std::abs(s.x[0]) >= prev;
      prev = std::abs(s.x[0]);
    }
    grows = grows && prev > 0.75;
  }
  b.check("flow-destabilizes", grows, "without impulses |x| is nondecreasing and exceeds 1.5|x0|");
  return b.finish();
}

// Every window of length >= T_min respects the rate bound.
std::size_t freq_violations(const ImpulseSequence& g, double rate, double T_min,
                            FrequencyMode mode, double horizon) {
  return check_window_frequency(g, rate, T_min, mode, horizon).pass ? 0 : 1;
}

BundleReport lemma1(const fs::path& dir, const BundleOptions& o) {
  Bundle b("lemma1-suite", dir);
  io::CsvTable table({"family", "parameters", "sequences", "violations"});
  const auto family = [&](const std::string& name, const std::string& params, std::size_t n,
                          const std::function<std::size_t(std::size_t)>& violations) {
    std::vector<std::size_t> v(n);
    parallel_for(n, o.threads, [&](std::size_t i) { v[i] = violations(i); });
    std::size_t total = 0;
    for (auto x : v) total += x;
    table.add_row(std::vector<std::string>{name, params, std::to_string(n), std::to_string(total)});
    return total;
  };

  const double H = 500.0;
  const std::vector<std::pair<std::size_t, double>> grid{
      {1, 0.5}, {1, 1.0}, {1, 1.25}, {2, 0.5}, {2, 1.0}, {2, 1.25}, {4, 0.5}, {4, 1.0}, {4, 1.25}};
  std::size_t bad = 0;
  for (double eps : {0.5, 0.1}) {
    bad += family("i-adt-upper", "eps=" + fmt(eps), 200, [&](std::size_t i) {
      const auto [n0, tau] = grid[i % grid.size()];
      const auto g = make_adt(n0, tau, derive_seed(o.seed, i), H);
      return freq_violations(g, 1.0 / tau + eps, static_cast<double>(n0) / eps,
                             FrequencyMode::Upper, H);
    });
    bad += family("i-radt-lower", "eps=" + fmt(eps), 200, [&](std::size_t i) {
      const auto [n0, tau] = grid[i % grid.size()];
      const auto g = make_reverse_adt(n0, tau, derive_seed(o.seed ^ 0x1ULL, i), H);
      return freq_violations(g, 1.0 / tau - eps, static_cast<double>(n0) / eps,
                             FrequencyMode::Lower, H);
    });
  }
  b.check("i", bad == 0, std::to_string(bad) + " violations");

  // ii: an empirical (rho, eps, T) triple yields an ADT class that contains the sequence.
  bad = family("ii-adt-from-frequency", "rho=0.8,eps=0.2", 100, [&](std::size_t i) -> std::size_t {
    const auto g = make_adt(2, 1.25, derive_seed(o.seed ^ 0x2ULL, i), H);
    const auto T = find_T_for_epsilon(g, 0.8, 0.2, H, FrequencyMode::Upper);
    if (!T) return 1;
    const auto prm = derive_adt_params(0.8, *T, 0.2);
    return verify_adt(g, static_cast<double>(prm.n0), prm.tau, H).pass ? 0 : 1;
  });
  b.check("ii", bad == 0, std::to_string(bad) + " violations");

  // iii: sequences with a uniform limiting rate L lie in Sup(L) and Sdn(L).
  bad = family("iii-uniform-limit", "L=1,eps=0.25", 50, [&](std::size_t i) -> std::size_t {
    // Repeating a random gap pattern of mean 1 gives n(s,s+t]/t -> 1 uniformly in s.
    const auto base = make_fixed_dwell(0.5, 1.5, derive_seed(o.seed ^ 0x3ULL, i), 8.0);
    std::vector<double> gaps;
    double prev = 0.0;
    for (double t : base.instants()) {
      gaps.push_back(t - prev);
      prev = t;
    }
    double mean = 0.0;
    for (double gp : gaps) mean += gp;
    mean /= static_cast<double>(gaps.size());
    std::vector<double> inst;
    double t = 0.0;
    for (std::size_t k = 0; t < H; ++k) {
      t += gaps[k % gaps.size()] / mean;
      inst.push_back(t);
    }
    const ImpulseSequence g(inst, H, "periodic-pattern");
    const auto up = find_T_for_epsilon(g, 1.0, 0.25, H, FrequencyMode::Upper);
    const auto lo = find_T_for_epsilon(g, 1.0, 0.25, H, FrequencyMode::Lower);
    return (up && lo) ? 0 : 1;
  });
  b.check("iii", bad == 0, std::to_string(bad) + " violations");

  bad = family("iv-fixed-dwell", "theta1=0.5..1,theta2=theta1+0..1", 200, [&](std::size_t i) {
    const double th1 = 0.5 + 0.5 * static_cast<double>(i % 5) / 4.0;
    const double th2 = th1 + static_cast<double>(i % 3) / 2.0;
    const auto g = make_fixed_dwell(th1, th2, derive_seed(o.seed ^ 0x4ULL, i), H);
    return static_cast<std::size_t>(!verify_adt(g, 1, th1, H).pass) +
           static_cast<std::size_t>(!verify_reverse_adt(g, 1, th2, H).pass);
  });
  b.check("iv", bad == 0, std::to_string(bad) + " violations");

  // v: Δ-perturbations keep the bound 1/τ + ε for windows ≥ T₁ = 4(1/τ + ε/2)t*/ε.
  const double Hv = 1000.0;
  const double delta = 0.3;
  bad = 0;
  for (double eps : {0.5, 0.25}) {
    const double t_star = 1.01 * std::max(delta, 2.0 / (eps / 2.0));
    const double T1 = 4.0 * (1.0 / 1.25 + eps / 2.0) * t_star / eps;
    bad += family("v-perturbation", "delta=0.3,eps=" + fmt(eps) + ",T1=" + fmt(T1), 100,
                  [&](std::size_t i) {
                    const auto g = make_adt(2, 1.25, derive_seed(o.seed ^ 0x5ULL, i), Hv);
                    const auto q = delta_perturb(g, delta, derive_seed(o.seed ^ 0x6ULL, i));
                    return freq_violations(q, 1.0 / 1.25 + eps, T1, FrequencyMode::Upper,
                                           q.horizon());
                  });
  }
  b.check("v", bad == 0, std::to_string(bad) + " violations");
  b.write("lemma1.csv", table.text());
  return b.finish();
}

BundleReport example_sequences(const fs::path& dir, const BundleOptions&) {
  Bundle b("example-sequences", dir);

  // example2-slow: frequency tends to 1 uniformly, but no ADT bound with τ = 1.
  const double H2 = 1e4;
  const auto e2 = make_example2(Example2Direction::Slow, H2);
  const auto T2 = find_T_for_epsilon(e2, 1.0, 0.1, H2, FrequencyMode::Upper);
  bool freq_ok = T2.has_value() &&
                 check_window_frequency(e2, 1.1, *T2, FrequencyMode::Upper, H2).pass;
  b.check("example2-frequency", freq_ok, T2 ? "T(0.1) = " + fmt(*T2) : "no T found");
  io::CsvTable adt({"n0", "tau", "pass", "witness_s", "witness_t", "count", "bound"});
  bool all_fail = true;
  for (int n0 = 1; n0 <= 7; ++n0) {
    const auto c = verify_adt(e2, n0, 1.0, H2);
    all_fail = all_fail && !c.pass;
    adt.add_row(std::vector<std::string>{std::to_string(n0), "1", c.pass ? "true" : "false",
                                         fmt(c.s), fmt(c.t), std::to_string(c.count),
                                         fmt(c.bound)});
  }
  b.write("example2_adt.csv", adt.text());
  b.check("example2-not-adt", all_fail, "verify_adt(n0, 1) fails for n0 = 1..7");

  // example1: dense blocks break every fixed-window bound, the average stays small.
  const double H1 = 128.0;
  const auto e1 = make_example1(H1);
  const auto rep = estimate_frequency(e1, 1.0, H1);
  std::vector<FrequencyReport> ladder;
  for (double T = 1.0; T <= 64.0; T *= 2.0) ladder.push_back(estimate_frequency(e1, T, H1));
  b.write("example1_frequency.csv", frequency_csv(ladder));
  double avg = 0.0;
  for (double t = 64.0; t <= H1; t += 0.5) {
    avg = std::max(avg, static_cast<double>(e1.count(0.0, t)) / t);
  }
  for (double tau : e1.instants()) {
    if (tau >= 64.0) avg = std::max(avg, static_cast<double>(e1.count(0.0, tau)) / tau);
  }
  b.check("example1-burst", rep.rho_sup >= 95.0, "rho_sup(T=1) = " + fmt(rep.rho_sup));
  b.check("example1-average", avg <= 1.6, "max n(0,t]/t over t >= 64 is " + fmt(avg));

  // example3: T(ε) grows with n₀, so the family is not a uniform subset.
  io::CsvTable e3({"n0", "T_eps_0.2"});
  std::optional<double> prev;
  bool increasing = true;
  for (std::size_t n0 : {2, 4, 8}) {
    const double H3 = 2000.0;
    const auto T = find_T_for_epsilon(make_example3(n0, H3), 1.0, 0.2, H3, FrequencyMode::Upper);
    increasing = increasing && T.has_value() && (!prev || *T > *prev);
    prev = T;
    e3.add_row(std::vector<std::string>{std::to_string(n0), T ? fmt(*T) : "not-found"});
  }
  b.write("example3_T.csv", e3.text());
  b.check("example3-nonuniform", increasing, "T(0.2) strictly increases over n0 = 2, 4, 8");
  return b.finish();
}

}  // namespace

std::vector<std::string> bundle_names() {
  return {"example-5.1", "example-5.2", "lemma1-suite", "example-sequences"};
}

BundleReport run_bundle(const std::string& name, const fs::path& dir, const BundleOptions& opts) {
  if (name == "example-5.1") return example51(dir, opts);
  if (name == "example-5.2") return example52(dir, opts);
  if (name == "lemma1-suite") return lemma1(dir, opts);
  if (name == "example-sequences") return example_sequences(dir, opts);
  throw ConfigError("unknown bundle '" + name + "'");
}

}  // namespace iiss::reproduce
