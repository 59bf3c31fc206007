#include "iiss/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <memory>
#include <sstream>

#include "iiss/comparison.hpp"
#include "iiss/errors.hpp"
#include "iiss/io.hpp"
#include "iiss/presets.hpp"
#include "iiss/reports.hpp"
#include "iiss/reproduce.hpp"
#include "iiss/sequences.hpp"
#include "iiss/simulator.hpp"

namespace iiss::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

std::vector<double> split_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(io::parse_double(item));
    } catch (const ConfigError&) {
      throw ConfigError(flag + ": '" + text + "' is not a comma-separated number list");
    }
  }
  if (out.empty()) throw ConfigError(flag + ": empty value");
  return out;
}

std::pair<double, double> split_pair(const std::string& text, const std::string& flag) {
  const auto v = split_numbers(text, flag);
  if (v.size() != 2) throw ConfigError(flag + " expects two numbers, got '" + text + "'");
  return {v[0], v[1]};
}

void set_sequence_from_class(config::SequenceSpec& q, const ClassDescriptor& c) {
  switch (c.kind) {
    case SequenceClass::ADT:
      q.kind = "adt";
      q.n0 = c.n0;
      q.tau = c.tau;
      break;
    case SequenceClass::ReverseADT:
      q.kind = "reverse-adt";
      q.n0 = c.n0;
      q.tau = c.tau;
      break;
    case SequenceClass::FixedDwell:
      q.kind = "fixed-dwell";
      q.theta1 = c.theta1;
      q.theta2 = c.theta2;
      break;
    default:
      q.kind = "none";
  }
}

bool random_kind(const std::string& kind) {
  return kind == "adt" || kind == "reverse-adt" || kind == "fixed-dwell";
}

std::string system_name(const GlobalOptions& g, const config::RunConfig& cfg) {
  if (!cfg.system.preset.empty()) return cfg.system.preset;
  return "config:" + g.config.value_or("");
}

std::string run_label(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return buf;
}

Tolerances tolerances_for(const config::RunConfig& cfg) {
  return config::tolerance_profile(cfg.experiment.tolerance_profile);
}

}  // namespace

config::RunConfig resolve_config(const GlobalOptions& g, const std::string& preset) {
  config::RunConfig cfg;
  if (g.config) {
    cfg = config::load(*g.config);
    if (!preset.empty() && cfg.system.preset != preset) {
      throw ConfigError("preset '" + preset + "' conflicts with the system in " + *g.config);
    }
  } else if (!preset.empty()) {
    cfg = config::parse("schema = 1\n[system]\npreset = \"" + preset + "\"\n", "preset");
    const auto& p = get_preset(preset);
    cfg.certify.theta = {p.theta};
    set_sequence_from_class(cfg.sequence, p.sequence_class);
  } else {
    throw ConfigError("no system given: name a preset or pass --config");
  }
  if (g.seed) cfg.experiment.seed = *g.seed;
  if (g.threads) cfg.experiment.threads = *g.threads;
  if (g.tolerance_profile) {
    config::tolerance_profile(*g.tolerance_profile);
    cfg.experiment.tolerance_profile = *g.tolerance_profile;
  }
  if (cfg.experiment.threads < 1) throw ConfigError("--threads must be at least 1");
  return cfg;
}

fs::path resolve_out_dir(const GlobalOptions& g, const config::RunConfig& cfg) {
  if (g.out) return *g.out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

Result cmd_certify(const GlobalOptions& g, const CertifyOptions& o) {
  Result res;
  const auto cfg = resolve_config(g, o.preset);
  const auto cand = config::build_candidate(cfg);
  if (!cand) throw ConfigError("certify needs a [candidate] section or a preset");
  const auto thetas = o.theta.empty() ? cfg.certify.theta : o.theta;
  if (thetas.empty()) throw ConfigError("certify needs --theta or [certify] theta");
  res.out_dir = resolve_out_dir(g, cfg);
  fs::create_directories(res.out_dir);
  const reports::Context ctx{system_name(g, cfg), config::system_hash(cfg), std::nullopt,
                             std::nullopt, std::nullopt};
  std::ostringstream text;

  bool violated = false;
  if (cfg.certify.validate && !o.no_validate) {
    CandidateSampleSpec spec;
    spec.seed = cfg.experiment.seed;
    const auto rep = validate_candidate(*cand, config::build_system(cfg), spec);
    io::write_text(res.out_dir / "candidate_validation.json", reports::candidate_json(rep, ctx));
    if (!rep.clean()) {
      violated = true;
      const auto& w = rep.violations.front();
      text << "candidate violates " << w.condition << " at t = " << format_double(w.t)
           << ", xi = " << format_double(w.xi[0]) << ": lhs " << format_double(w.lhs)
           << " > rhs " << format_double(w.rhs) << " (" << rep.violations.size()
           << " violations)\n";
    } else {
      text << "candidate: no violations on " << rep.points << " points\n";
    }
  }

  VerdictOptions vopt;
  vopt.search.threads = cfg.experiment.threads;
  bool inconclusive = false;
  for (double theta : thetas) {
    auto v = cand->regime == Regime::Decay ? theorem1_verdict(*cand, theta, vopt)
                                           : theorem2_verdict(*cand, theta, vopt);
    text << "theta = " << format_double(theta) << ": " << to_string(v.theorem);
    if (v.conclusive()) text << " over " << v.class_text;
    text << " (M = " << format_double(v.M) << ", N = " << format_double(v.N) << ")\n";
    for (const auto& w : v.warnings) text << "  warning: " << w << "\n";
    inconclusive = inconclusive || !v.conclusive();
    res.verdicts.push_back(std::move(v));
  }
  if (res.verdicts.size() == 1) {
    io::write_text(res.out_dir / "verdict.json", reports::verdict_json(res.verdicts[0], ctx));
  } else {
    io::write_text(res.out_dir / "verdicts.json", reports::verdicts_json(res.verdicts, ctx));
  }
  res.exit_code = violated ? kExitViolation : inconclusive ? kExitInconclusive : kExitOk;
  res.text = text.str();
  return res;
}

Result cmd_simulate(const GlobalOptions& g, const SimulateOptions& o) {
  Result res;
  const auto cfg = resolve_config(g, o.preset);
  const auto sys = config::build_system(cfg);
  const double horizon = o.horizon.value_or(cfg.experiment.horizon);
  if (!(horizon > 0.0)) throw ConfigError("--horizon must be positive");
  const auto tol = tolerances_for(cfg);
  const auto seed = cfg.experiment.seed;

  auto qspec = cfg.sequence;
  std::vector<ImpulseSequence> seqs;
  std::string sequence_class;
  if (o.no_impulses) {
    seqs.emplace_back(std::vector<double>{}, horizon, "none");
    sequence_class = "none";
  } else if (o.explicit_instants) {
    seqs.emplace_back(*o.explicit_instants, horizon, "explicit");
    sequence_class = "explicit";
  } else {
    if (o.seeds) {
      if (*o.seeds < 1) throw ConfigError("--seeds must be at least 1");
      qspec.count = *o.seeds;
    }
    seqs = config::build_sequences(qspec, horizon, seed);
    sequence_class = qspec.kind;
  }
  const bool seeded = !o.no_impulses && !o.explicit_instants && random_kind(qspec.kind);

  auto x0s = o.x0.empty() ? cfg.experiment.x0 : o.x0;
  if (x0s.empty()) x0s.push_back(std::vector<double>(static_cast<std::size_t>(sys.n), 0.5));
  for (const auto& x : x0s) {
    if (static_cast<int>(x.size()) != sys.n) {
      throw ConfigError("--x0 needs " + std::to_string(sys.n) + " components");
    }
  }
  const auto t0s = o.t0.empty() ? cfg.experiment.t0 : o.t0;
  const auto u = config::build_input(cfg.experiment, sys.m);

  std::vector<RunSpec> specs;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (double t0 : t0s) {
      for (const auto& x : x0s) {
        RunSpec r;
        r.gamma = seqs[i];
        r.t0 = t0;
        r.x0 = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
        r.u = u;
        r.seed = seeded ? derive_seed(seed, i) : 0;
        r.label = seqs[i].label() + "-" + std::to_string(i);
        specs.push_back(std::move(r));
      }
    }
  }

  res.out_dir = resolve_out_dir(g, cfg);
  fs::create_directories(res.out_dir);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    io::write_text(res.out_dir / ("sequence_" + run_label(i) + ".txt"), seqs[i].serialize());
  }

  const auto results = ensemble(sys, specs, horizon, tol, cfg.experiment.threads);
  std::optional<LyapunovCandidate> cand;
  std::shared_ptr<const ComparisonSystem> csys;
  if (o.plot) {
    cand = config::build_candidate(cfg);
    if (cand) csys = std::make_shared<const ComparisonSystem>(ComparisonSpec::from_candidate(*cand));
  }

  std::vector<reports::ManifestEntry> manifest;
  std::size_t failures = 0;
  std::ostringstream text;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    reports::ManifestEntry e;
    e.label = r.spec.label;
    e.seed = r.spec.seed;
    e.t0 = r.spec.t0;
    e.x0.assign(r.spec.x0.data(), r.spec.x0.data() + r.spec.x0.size());
    if (!r.error.empty()) {
      ++failures;
      e.status = r.error;
      text << "run " << i << " failed: " << r.error << "\n";
      manifest.push_back(std::move(e));
      continue;
    }
    const auto& tr = *r.trajectory;
    e.status = tr.truncated ? "truncated" : "ok";
    e.jumps = tr.jumps.size();
    e.files = {"traj_" + run_label(i) + ".csv", "jumps_" + run_label(i) + ".csv"};
    io::write_text(res.out_dir / e.files[0], trajectory_csv(tr));
    io::write_text(res.out_dir / e.files[1], jumps_csv(tr));
    if (tr.truncated) {
      text << "run " << i << " truncated at t = " << format_double(tr.t_end) << "\n";
    }
    if (o.plot) {
      std::optional<ComparisonTrajectory> z;
      if (csys) {
        try {
          z = solve_comparison(csys, r.spec.gamma, tr.t0, cand->V(tr.t0, r.spec.x0), tr.t_end);
        } catch (const Error&) {
          // Finite escape of the comparison solution: the overlay is omitted.
        }
      }
      io::CsvTable plot({"t", "h", "V", "z"});
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (const auto& s : tr.samples) {
        plot.add_row(std::vector<double>{s.t, sys.h(s.t, s.x), cand ? cand->V(s.t, s.x) : nan,
                                         z && s.t <= z->t_end() ? z->at(s.t) : nan});
      }
      e.files.push_back("plot_" + run_label(i) + ".csv");
      plot.write(res.out_dir / e.files.back());
    }
    manifest.push_back(std::move(e));
  }
  const reports::Context ctx{system_name(g, cfg), config::system_hash(cfg), seed, tol, horizon};
  io::write_text(res.out_dir / "manifest.json",
                 reports::manifest_json(manifest, ctx, sequence_class, failures));
  text << results.size() << " runs, " << failures << " failed, written to "
       << res.out_dir.string() << "\n";
  res.text = text.str();
  res.exit_code = (!results.empty() && failures == results.size()) ? kExitFailure : kExitOk;
  return res;
}

Result cmd_classify(const GlobalOptions& g, const ClassifyOptions& o) {
  Result res;
  const std::uint64_t seed = g.seed.value_or(1);
  std::vector<ImpulseSequence> seqs;
  auto checks = o.check_freq;

  const auto need = [&](double fallback) { return o.horizon.value_or(fallback); };
  if (o.name == "example1") {
    seqs.push_back(make_example1(need(128.0)));
  } else if (o.name == "example2-slow" || o.name == "example2-fast") {
    const auto dir = o.name == "example2-slow" ? Example2Direction::Slow : Example2Direction::Fast;
    seqs.push_back(make_example2(dir, need(1e4)));
  } else if (o.name == "example3") {
    const auto n0s = o.n0.empty() ? std::vector<int>{2} : o.n0;
    for (int n0 : n0s) {
      if (n0 < 1) throw ConfigError("--n0 must be at least 1");
      seqs.push_back(make_example3(static_cast<std::size_t>(n0), need(2000.0)));
    }
    if (checks.empty()) checks.emplace_back(1.0, 0.2);
  } else if (!o.name.empty()) {
    throw ConfigError("unknown sequence '" + o.name +
                      "' (example1, example2-slow, example2-fast, example3)");
  }
  const auto positive_n0 = [](double n0) {
    if (n0 < 1 || n0 != std::floor(n0)) throw ConfigError("generator n0 must be a positive integer");
    return static_cast<std::size_t>(n0);
  };
  if (o.adt_gen) {
    seqs.push_back(make_adt(positive_n0(o.adt_gen->first), o.adt_gen->second, seed, need(500.0)));
  }
  if (o.reverse_adt_gen) {
    seqs.push_back(make_reverse_adt(positive_n0(o.reverse_adt_gen->first),
                                    o.reverse_adt_gen->second, seed, need(500.0)));
  }
  if (o.fixed_dwell) {
    seqs.push_back(make_fixed_dwell(o.fixed_dwell->first, o.fixed_dwell->second, seed,
                                    need(500.0)));
  }
  if (o.explicit_instants) {
    const auto& v = *o.explicit_instants;
    const double last = v.empty() ? 1.0 : *std::max_element(v.begin(), v.end());
    seqs.emplace_back(v, need(last), "explicit");
  }
  fs::path out = g.out ? fs::path(*g.out) : fs::path("iiss-out");
  if (g.config) {
    auto cfg = resolve_config(g, "");
    out = resolve_out_dir(g, cfg);
    if (seqs.empty()) seqs = config::build_sequences(cfg.sequence, need(cfg.experiment.horizon),
                                                     cfg.experiment.seed);
  } else if (!g.out) {
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') out = env;
  }
  if (seqs.empty()) throw ConfigError("classify needs a sequence name, a generator or --explicit");

  res.out_dir = out;
  fs::create_directories(out);
  std::ostringstream text;
  bool failed = false;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& q = seqs[i];
    const double H = q.horizon();
    reports::ClassifyReport rep;
    rep.sequence = q.label();
    rep.horizon = H;
    rep.impulses = q.size();
    text << "[" << i << "] " << q.label() << ": " << q.size() << " impulses on (0, "
         << format_double(H) << "]\n";

    std::vector<FrequencyReport> ladder;
    for (double T = 1.0; T <= H / 2.0; T *= 2.0) ladder.push_back(estimate_frequency(q, T, H));
    io::write_text(out / ("frequency_" + run_label(i) + ".csv"), frequency_csv(ladder));
    io::write_text(out / ("sequence_" + run_label(i) + ".txt"), q.serialize());

    for (const auto& [n0, tau] : o.adt) {
      const auto c = verify_adt(q, n0, tau, H);
      rep.adt.push_back({n0, tau, c});
      text << "  ADT(" << format_double(n0) << ", " << format_double(tau)
           << "): " << (c.pass ? "pass" : "fail");
      if (!c.pass) {
        failed = true;
        text << ", n(" << format_double(c.s) << ", " << format_double(c.t) << "] = " << c.count
             << " > " << format_double(c.bound);
      }
      text << "\n";
    }
    for (const auto& [rho, eps] : checks) {
      const auto T = find_T_for_epsilon(q, rho, eps, H, FrequencyMode::Upper);
      rep.freq.push_back({rho, eps, T});
      text << "  frequency <= " << format_double(rho) << " + " << format_double(eps) << ": ";
      if (T) {
        text << "pass for windows >= T = " << format_double(*T) << "\n";
      } else {
        failed = true;
        text << "no T found on the horizon\n";
      }
    }
    io::write_text(out / ("classify_" + run_label(i) + ".json"), reports::classify_json(rep));
  }
  res.text = text.str();
  res.exit_code = failed ? kExitViolation : kExitOk;
  return res;
}

Result cmd_reproduce(const GlobalOptions& g, const std::string& name) {
  Result res;
  const auto all = reproduce::bundle_names();
  std::vector<std::string> names;
  if (name == "all") {
    names = all;
  } else if (std::find(all.begin(), all.end(), name) != all.end()) {
    names = {name};
  } else {
    throw ConfigError("unknown bundle '" + name + "'");
  }
  reproduce::BundleOptions opts;
  config::RunConfig cfg;
  if (g.config) cfg = resolve_config(g, "");
  opts.seed = g.seed.value_or(1);
  opts.threads = g.threads.value_or(1);
  if (opts.threads < 1) throw ConfigError("--threads must be at least 1");
  opts.tol = config::tolerance_profile(g.tolerance_profile.value_or("default"));
  res.out_dir = resolve_out_dir(g, cfg);

  std::ostringstream text;
  std::vector<std::string> failing;
  for (const auto& n : names) {
    const auto rep = reproduce::run_bundle(n, res.out_dir / n, opts);
    for (const auto& c : rep.checks) {
      text << (c.pass ? "[PASS] " : "[FAIL] ") << n << "/" << c.name << ": " << c.detail << "\n";
      if (!c.pass) failing.push_back(n + "/" + c.name);
    }
  }
  for (const auto& f : failing) text << "failed: " << f << "\n";
  res.text = text.str();
  res.exit_code = failing.empty() ? kExitOk : kExitFailure;
  return res;
}

Result run(const std::vector<std::string>& args) {
  CLI::App app{"Impulsive-system ISS certification and simulation", "iiss"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string config_path, out, profile;
  std::uint64_t seed = 0;
  int threads = 0;
  auto* o_config = app.add_option("--config", config_path, "TOML run configuration");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_profile = app.add_option("--tolerance-profile", profile, "integrator tolerances")
                        ->check(CLI::IsMember({"default", "tight"}));

  CertifyOptions co;
  auto* certify = app.add_subcommand("certify", "budget constants and stability verdict");
  certify->add_option("preset", co.preset, "preset name");
  certify->add_option("--theta", co.theta, "window length (repeatable or comma list)")
      ->delimiter(',')
      ->allow_extra_args(false);
  certify->add_flag("--no-validate", co.no_validate, "skip the sampled candidate falsifier");

  SimulateOptions so;
  int seeds = 0;
  std::string sim_explicit;
  double sim_horizon = 0.0;
  std::vector<std::string> sim_x0;
  auto* simulate = app.add_subcommand("simulate", "integrate trajectories with jumps");
  simulate->add_option("preset", so.preset, "preset name");
  auto* o_seeds = simulate->add_option("--seeds", seeds, "number of seeded sequences");
  auto* o_sim_explicit = simulate->add_option("--explicit", sim_explicit, "impulse instants, comma list");
  auto* o_sim_horizon = simulate->add_option("--horizon", sim_horizon, "simulation horizon");
  simulate->add_flag("--no-impulses", so.no_impulses, "flow only");
  simulate->add_option("--x0", sim_x0, "initial state, comma list (repeatable)")
      ->allow_extra_args(false);
  simulate->add_option("--t0", so.t0, "initial time (repeatable)")
      ->delimiter(',')
      ->allow_extra_args(false);
  simulate->add_flag("--plot", so.plot, "write h, V and comparison curves");

  ClassifyOptions clo;
  std::string adt_gen, radt_gen, fixed_dwell, cl_explicit;
  std::vector<std::string> adt, check_freq;
  double cl_horizon = 0.0;
  bool and_flag = false;
  auto* classify = app.add_subcommand("classify", "frequency and ADT report for a sequence");
  classify->add_option("name", clo.name, "example1, example2-slow, example2-fast or example3");
  auto* o_adt_gen = classify->add_option("--adt-gen", adt_gen, "draw from Sad(n0, tau)");
  auto* o_radt_gen = classify->add_option("--reverse-adt-gen", radt_gen, "draw from reverse ADT");
  auto* o_fixed = classify->add_option("--fixed-dwell", fixed_dwell, "draw with dwell in [t1, t2]");
  auto* o_cl_explicit = classify->add_option("--explicit", cl_explicit, "instants, comma list");
  classify->add_option("--adt", adt, "check ADT n0,tau (repeatable)")->allow_extra_args(false);
  classify->add_option("--check-freq", check_freq, "find T for rho,eps (repeatable)")
      ->allow_extra_args(false);
  classify->add_option("--n0", clo.n0, "example-3 parameter (repeatable)")->allow_extra_args(false);
  classify->add_flag("--and", and_flag, "separator between repeated options");
  auto* o_cl_horizon = classify->add_option("--horizon", cl_horizon, "horizon");

  std::string bundle;
  auto* repro = app.add_subcommand("reproduce", "run an acceptance bundle");
  repro->add_option("name", bundle, "bundle name or 'all'")->required();

  Result res;
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out_s, err_s;
    const int code = app.exit(e, out_s, err_s);
    res.text = out_s.str() + err_s.str();
    res.exit_code = code == 0 ? kExitOk : kExitFailure;
    return res;
  }

  if (*o_config) g.config = config_path;
  if (*o_seed) g.seed = seed;
  if (*o_threads) g.threads = threads;
  if (*o_out) g.out = out;
  if (*o_profile) g.tolerance_profile = profile;

  try {
    if (*certify) return cmd_certify(g, co);
    if (*simulate) {
      if (*o_seeds) so.seeds = seeds;
      if (*o_sim_explicit) so.explicit_instants = split_numbers(sim_explicit, "--explicit");
      if (*o_sim_horizon) so.horizon = sim_horizon;
      for (const auto& x : sim_x0) so.x0.push_back(split_numbers(x, "--x0"));
      return cmd_simulate(g, so);
    }
    if (*classify) {
      if (*o_adt_gen) clo.adt_gen = split_pair(adt_gen, "--adt-gen");
      if (*o_radt_gen) clo.reverse_adt_gen = split_pair(radt_gen, "--reverse-adt-gen");
      if (*o_fixed) clo.fixed_dwell = split_pair(fixed_dwell, "--fixed-dwell");
      if (*o_cl_explicit) clo.explicit_instants = split_numbers(cl_explicit, "--explicit");
      for (const auto& a : adt) clo.adt.push_back(split_pair(a, "--adt"));
      for (const auto& c : check_freq) clo.check_freq.push_back(split_pair(c, "--check-freq"));
      if (*o_cl_horizon) clo.horizon = cl_horizon;
      return cmd_classify(g, clo);
    }
    return cmd_reproduce(g, bundle);
  } catch (const Error& e) {
    res.text = std::string("error: ") + e.what() + "\n";
    res.exit_code = kExitFailure;
  } catch (const std::exception& e) {
    res.text = std::string("error: ") + e.what() + "\n";
    res.exit_code = kExitFailure;
  }
  return res;
}

}  // namespace iiss::cli
