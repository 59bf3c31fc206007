#include "iiss/config.hpp"

#include <array>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "iiss/errors.hpp"
#include "iiss/expr.hpp"
#include "iiss/io.hpp"
#include "iiss/presets.hpp"

namespace iiss::config {

namespace {

[[noreturn]] void bad(std::string_view where, const std::string& msg) {
  throw ConfigError(std::string(where) + ": " + msg);
}

void check_keys(const toml::table& t, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  const std::set<std::string_view> ok(allowed);
  for (const auto& [k, v] : t) {
    if (!ok.contains(k.str())) bad(where, "unknown key '" + std::string(k.str()) + "'");
  }
}

double as_double(const toml::node& n, const std::string& where) {
  if (const auto* f = n.as_floating_point()) return f->get();
  if (const auto* i = n.as_integer()) return static_cast<double>(i->get());
  bad(where, "expected a number");
}

std::int64_t as_int(const toml::node& n, const std::string& where) {
  if (const auto* i = n.as_integer()) return i->get();
  bad(where, "expected an integer");
}

std::string as_string(const toml::node& n, const std::string& where) {
  if (const auto* s = n.as_string()) return s->get();
  bad(where, "expected a string");
}

bool as_bool(const toml::node& n, const std::string& where) {
  if (const auto* b = n.as_boolean()) return b->get();
  bad(where, "expected a boolean");
}

const toml::array& as_array(const toml::node& n, const std::string& where) {
  if (const auto* a = n.as_array()) return *a;
  bad(where, "expected an array");
}

std::vector<double> doubles(const toml::node& n, const std::string& where) {
  std::vector<double> out;
  if (!n.is_array()) {
    out.push_back(as_double(n, where));  // a scalar stands for a one-element list
    return out;
  }
  for (const auto& e : as_array(n, where)) out.push_back(as_double(e, where));
  return out;
}

std::vector<std::string> strings(const toml::node& n, const std::string& where) {
  std::vector<std::string> out;
  if (!n.is_array()) {
    out.push_back(as_string(n, where));
    return out;
  }
  for (const auto& e : as_array(n, where)) out.push_back(as_string(e, where));
  return out;
}

// Calls fn(node, qualified-name) for each key present in the table.
template <typename Fn>
void each(const toml::table& t, const std::string& section, Fn fn) {
  for (const auto& [k, v] : t) fn(std::string(k.str()), v, section + "." + std::string(k.str()));
}

const toml::table& subtable(const toml::node& n, const std::string& where) {
  if (const auto* t = n.as_table()) return *t;
  bad(where, "expected a table");
}

void read_system(const toml::table& t, SystemSpec& s) {
  check_keys(t, {"preset", "n", "m", "f", "g", "h", "h0"}, "[system]");
  each(t, "system", [&](const std::string& k, const toml::node& v, const std::string& w) {
    if (k == "preset") s.preset = as_string(v, w);
    if (k == "n") s.n = static_cast<int>(as_int(v, w));
    if (k == "m") s.m = static_cast<int>(as_int(v, w));
    if (k == "f") s.f = strings(v, w);
    if (k == "g") s.g = strings(v, w);
    if (k == "h") s.h = as_string(v, w);
    if (k == "h0") s.h0 = as_string(v, w);
  });
}

void read_candidate(const toml::table& t, CandidateSpec& c) {
  check_keys(t,
             {"V", "phi1", "phi2", "chi", "pi", "phi", "psi", "phi_breakpoints", "psi_breakpoints",
              "p", "p_hint", "p_period", "p_t_max", "regime", "escape_declared_divergent"},
             "[candidate]");
  each(t, "candidate", [&](const std::string& k, const toml::node& v, const std::string& w) {
    if (k == "V") c.V = as_string(v, w);
    if (k == "phi1") c.phi1 = as_string(v, w);
    if (k == "phi2") c.phi2 = as_string(v, w);
    if (k == "chi") c.chi = as_string(v, w);
    if (k == "pi") c.pi = as_string(v, w);
    if (k == "phi") c.phi = as_string(v, w);
    if (k == "psi") c.psi = as_string(v, w);
    if (k == "phi_breakpoints") c.phi_breakpoints = doubles(v, w);
    if (k == "psi_breakpoints") c.psi_breakpoints = doubles(v, w);
    if (k == "p") c.p = as_string(v, w);
    if (k == "p_hint") c.p_hint = as_string(v, w);
    if (k == "p_period") c.p_period = as_double(v, w);
    if (k == "p_t_max") c.p_t_max = as_double(v, w);
    if (k == "regime") c.regime = as_string(v, w);
    if (k == "escape_declared_divergent") c.escape_declared_divergent = as_bool(v, w);
  });
}

void read_certify(const toml::table& t, CertifySpec& c) {
  check_keys(t, {"theta", "validate"}, "[certify]");
  each(t, "certify", [&](const std::string& k, const toml::node& v, const std::string& w) {
    if (k == "theta") c.theta = doubles(v, w);
    if (k == "validate") c.validate = as_bool(v, w);
  });
}

void read_sequence(const toml::table& t, SequenceSpec& s) {
  check_keys(t, {"kind", "n0", "tau", "theta1", "theta2", "instants", "count"}, "[sequence]");
  each(t, "sequence", [&](const std::string& k, const toml::node& v, const std::string& w) {
    if (k == "kind") s.kind = as_string(v, w);
    if (k == "n0") s.n0 = as_double(v, w);
    if (k == "tau") s.tau = as_double(v, w);
    if (k == "theta1") s.theta1 = as_double(v, w);
    if (k == "theta2") s.theta2 = as_double(v, w);
    if (k == "instants") s.instants = doubles(v, w);
    if (k == "count") s.count = static_cast<int>(as_int(v, w));
  });
}

void read_experiment(const toml::table& t, ExperimentSpec& e) {
  check_keys(t,
             {"t0", "x0", "input", "input_value", "input_expr", "horizon", "tolerance_profile",
              "seed", "threads"},
             "[experiment]");
  each(t, "experiment", [&](const std::string& k, const toml::node& v, const std::string& w) {
    if (k == "t0") e.t0 = doubles(v, w);
    if (k == "x0") {
      e.x0.clear();
      for (const auto& row : as_array(v, w)) e.x0.push_back(doubles(row, w));
    }
    if (k == "input") e.input = as_string(v, w);
    if (k == "input_value") e.input_value = doubles(v, w);
    if (k == "input_expr") e.input_expr = strings(v, w);
    if (k == "horizon") e.horizon = as_double(v, w);
    if (k == "tolerance_profile") e.tolerance_profile = as_string(v, w);
    if (k == "seed") {
      const auto s = as_int(v, w);
      if (s < 0) bad(w, "seed must be nonnegative");
      e.seed = static_cast<std::uint64_t>(s);
    }
    if (k == "threads") e.threads = static_cast<int>(as_int(v, w));
  });
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return io::format_double(v);
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + "]";
}

std::string list(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quote(v[i]);
  return out + "]";
}

const std::set<std::string> kSequenceKinds{"none",          "explicit",      "adt",
                                           "reverse-adt",   "fixed-dwell",   "example1",
                                           "example2-slow", "example2-fast", "example3"};

std::vector<std::string> state_vars(int n, int m, bool with_time = true) {
  std::vector<std::string> v;
  if (with_time) v.emplace_back("t");
  for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
  for (int i = 0; i < m; ++i) v.push_back("u" + std::to_string(i));
  return v;
}

std::string serialize_system(const RunConfig& cfg) {
  std::ostringstream o;
  const auto& s = cfg.system;
  o << "[system]\n";
  if (!s.preset.empty()) o << "preset = " << quote(s.preset) << "\n";
  o << "n = " << s.n << "\nm = " << s.m << "\n";
  if (!s.f.empty()) o << "f = " << list(s.f) << "\n";
  if (!s.g.empty()) o << "g = " << list(s.g) << "\n";
  if (!s.h.empty()) o << "h = " << quote(s.h) << "\n";
  if (!s.h0.empty()) o << "h0 = " << quote(s.h0) << "\n";
  if (cfg.candidate) {
    const auto& c = *cfg.candidate;
    o << "\n[candidate]\n";
    o << "V = " << quote(c.V) << "\nphi1 = " << quote(c.phi1) << "\nphi2 = " << quote(c.phi2)
      << "\nchi = " << quote(c.chi) << "\npi = " << quote(c.pi) << "\nphi = " << quote(c.phi)
      << "\npsi = " << quote(c.psi) << "\nphi_breakpoints = " << list(c.phi_breakpoints)
      << "\npsi_breakpoints = " << list(c.psi_breakpoints) << "\np = " << quote(c.p)
      << "\np_hint = " << quote(c.p_hint) << "\np_period = " << num(c.p_period)
      << "\np_t_max = " << num(c.p_t_max) << "\nregime = " << quote(c.regime)
      << "\nescape_declared_divergent = " << (c.escape_declared_divergent ? "true" : "false")
      << "\n";
  }
  return o.str();
}

}  // namespace

RunConfig parse(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e.description() << " (line " << e.source().begin.line << ", column "
        << e.source().begin.column << ")";
    bad(source, msg.str());
  }
  RunConfig cfg;
  check_keys(root, {"schema", "system", "candidate", "certify", "sequence", "experiment", "output"},
             std::string(source));
  const auto* schema = root.get("schema");
  if (!schema) bad(source, "missing 'schema' (expected " + std::to_string(kSchemaVersion) + ")");
  cfg.schema = static_cast<int>(as_int(*schema, "schema"));
  if (cfg.schema != kSchemaVersion) {
    bad(source, "unsupported schema " + std::to_string(cfg.schema));
  }
  if (const auto* n = root.get("system")) read_system(subtable(*n, "[system]"), cfg.system);
  if (const auto* n = root.get("candidate")) {
    cfg.candidate.emplace();
    read_candidate(subtable(*n, "[candidate]"), *cfg.candidate);
  }
  if (const auto* n = root.get("certify")) read_certify(subtable(*n, "[certify]"), cfg.certify);
  if (const auto* n = root.get("sequence")) read_sequence(subtable(*n, "[sequence]"), cfg.sequence);
  if (const auto* n = root.get("experiment")) {
    read_experiment(subtable(*n, "[experiment]"), cfg.experiment);
  }
  if (const auto* n = root.get("output")) {
    const auto& t = subtable(*n, "[output]");
    check_keys(t, {"dir"}, "[output]");
    if (const auto* d = t.get("dir")) cfg.output_dir = as_string(*d, "output.dir");
  }
  if (!cfg.system.preset.empty()) {
    const auto& p = get_preset(cfg.system.preset);
    const bool n_given = root["system"]["n"].node() != nullptr;
    const bool m_given = root["system"]["m"].node() != nullptr;
    if ((n_given && cfg.system.n != p.system.n) || (m_given && cfg.system.m != p.system.m)) {
      bad("[system]", "n/m disagree with preset '" + p.name + "'");
    }
    cfg.system.n = p.system.n;
    cfg.system.m = p.system.m;
  }
  validate(cfg);
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  return parse(io::read_text(path), path.string());
}

void validate(const RunConfig& cfg) {
  const auto& s = cfg.system;
  if (s.preset.empty()) {
    if (s.n < 1 || s.m < 0) bad("[system]", "need n >= 1 and m >= 0");
    if (static_cast<int>(s.f.size()) != s.n) bad("[system]", "f needs n components");
    if (static_cast<int>(s.g.size()) != s.n) bad("[system]", "g needs n components");
    const auto vars = state_vars(s.n, s.m);
    for (const auto& e : s.f) (void)expr::Expression::parse(e, vars);
    for (const auto& e : s.g) (void)expr::Expression::parse(e, vars);
    for (const auto* e : {&s.h, &s.h0}) {
      if (!e->empty()) (void)expr::Expression::parse(*e, state_vars(s.n, 0));
    }
  } else {
    (void)get_preset(s.preset);
    if (!s.f.empty() || !s.g.empty()) bad("[system]", "give either a preset or f and g, not both");
  }
  if (cfg.candidate) {
    const auto& c = *cfg.candidate;
    (void)expr::Expression::parse(c.V, state_vars(s.n, 0));
    for (const auto* e : {&c.phi1, &c.phi2, &c.chi, &c.pi, &c.phi, &c.psi}) {
      (void)expr::Expression::parse(*e, {"s"});
    }
    (void)expr::Expression::parse(c.p, {"t"});
    static const std::set<std::string> hints{"none", "constant", "constant-after", "periodic",
                                             "monotone"};
    if (!hints.contains(c.p_hint)) bad("[candidate]", "unknown p_hint '" + c.p_hint + "'");
    if (c.p_hint == "periodic" && !(c.p_period > 0)) bad("[candidate]", "p_period must be > 0");
    if (c.regime != "decay" && c.regime != "growth") {
      bad("[candidate]", "regime must be 'decay' or 'growth'");
    }
  } else if (s.preset.empty() && !cfg.certify.theta.empty()) {
    bad("[certify]", "an expression system needs a [candidate] section");
  }
  for (double th : cfg.certify.theta) {
    if (!(th > 0)) bad("[certify]", "theta must be positive");
  }
  const auto& q = cfg.sequence;
  if (!kSequenceKinds.contains(q.kind)) bad("[sequence]", "unknown kind '" + q.kind + "'");
  if (q.count < 1) bad("[sequence]", "count must be >= 1");
  if (q.kind == "adt" || q.kind == "reverse-adt") {
    if (!(q.tau > 0) || q.n0 < 0 || q.n0 != std::floor(q.n0)) {
      bad("[sequence]", q.kind + " needs an integer n0 >= 0 and tau > 0");
    }
    if (q.kind == "adt" && q.n0 < 1) bad("[sequence]", "adt needs n0 >= 1");
  }
  if (q.kind == "fixed-dwell" && !(q.theta1 > 0 && q.theta1 <= q.theta2)) {
    bad("[sequence]", "fixed-dwell needs 0 < theta1 <= theta2");
  }
  if (q.kind == "example3" && (q.n0 < 1 || q.n0 != std::floor(q.n0))) {
    bad("[sequence]", "example3 needs an integer n0 >= 1");
  }
  const auto& e = cfg.experiment;
  if (!(e.horizon > 0)) bad("[experiment]", "horizon must be positive");
  for (const auto& x : e.x0) {
    if (static_cast<int>(x.size()) != s.n) bad("[experiment]", "x0 entries need n components");
  }
  if (e.input != "zero" && e.input != "constant" && e.input != "expression") {
    bad("[experiment]", "input must be zero, constant or expression");
  }
  if (e.input == "constant" && static_cast<int>(e.input_value.size()) != s.m) {
    bad("[experiment]", "input_value needs m components");
  }
  if (e.input == "expression") {
    if (static_cast<int>(e.input_expr.size()) != s.m) {
      bad("[experiment]", "input_expr needs m components");
    }
    for (const auto& x : e.input_expr) (void)expr::Expression::parse(x, {"t"});
  }
  if (e.tolerance_profile != "default" && e.tolerance_profile != "tight") {
    bad("[experiment]", "tolerance_profile must be default or tight");
  }
  if (e.threads < 0) bad("[experiment]", "threads must be >= 0");
}

std::string serialize(const RunConfig& cfg) {
  std::ostringstream o;
  o << "schema = " << cfg.schema << "\n\n" << serialize_system(cfg);
  o << "\n[certify]\ntheta = " << list(cfg.certify.theta)
    << "\nvalidate = " << (cfg.certify.validate ? "true" : "false") << "\n";
  const auto& q = cfg.sequence;
  o << "\n[sequence]\nkind = " << quote(q.kind) << "\nn0 = " << num(q.n0)
    << "\ntau = " << num(q.tau) << "\ntheta1 = " << num(q.theta1)
    << "\ntheta2 = " << num(q.theta2) << "\ninstants = " << list(q.instants)
    << "\ncount = " << q.count << "\n";
  const auto& e = cfg.experiment;
  o << "\n[experiment]\nt0 = " << list(e.t0) << "\nx0 = [";
  for (std::size_t i = 0; i < e.x0.size(); ++i) o << (i ? ", " : "") << list(e.x0[i]);
  o << "]\ninput = " << quote(e.input) << "\ninput_value = " << list(e.input_value)
    << "\ninput_expr = " << list(e.input_expr) << "\nhorizon = " << num(e.horizon)
    << "\ntolerance_profile = " << quote(e.tolerance_profile) << "\nseed = " << e.seed
    << "\nthreads = " << e.threads << "\n";
  o << "\n[output]\ndir = " << quote(cfg.output_dir) << "\n";
  return o.str();
}

ImpulsiveSystem build_system(const RunConfig& cfg) {
  const auto& s = cfg.system;
  if (!s.preset.empty()) return get_preset(s.preset).system;
  ImpulsiveSystem sys;
  sys.name = "config";
  sys.n = s.n;
  sys.m = s.m;
  const auto vars = state_vars(s.n, s.m);
  const auto compile = [&](const std::vector<std::string>& comps) {
    std::vector<expr::Expression> ex;
    for (const auto& c : comps) ex.push_back(expr::Expression::parse(c, vars));
    const int n = s.n;
    const int m = s.m;
    return [ex, n, m](double t, const Vec& x, const Vec& u) {
      std::array<double, 64> buf{};
      std::vector<double> big;
      double* v = buf.data();
      if (1 + n + m > static_cast<int>(buf.size())) {
        big.resize(static_cast<std::size_t>(1 + n + m));
        v = big.data();
      }
      v[0] = t;
      for (int i = 0; i < n; ++i) v[1 + i] = x[i];
      for (int i = 0; i < m; ++i) v[1 + n + i] = i < u.size() ? u[i] : 0.0;
      Vec out(n);
      const std::span<const double> in(v, static_cast<std::size_t>(1 + n + m));
      for (int i = 0; i < n; ++i) out[i] = ex[static_cast<std::size_t>(i)](in);
      return out;
    };
  };
  sys.f = compile(s.f);
  sys.g = compile(s.g);
  const auto measure = [&](const std::string& text) -> ImpulsiveSystem::Measure {
    if (text.empty()) return [](double, const Vec& x) { return x.norm(); };
    const auto e = expr::Expression::parse(text, state_vars(s.n, 0));
    return [e](double t, const Vec& x) {
      std::vector<double> v{t};
      v.insert(v.end(), x.data(), x.data() + x.size());
      return e(v);
    };
  };
  sys.h = measure(s.h);
  sys.h0 = measure(s.h0);
  sys.validate();
  return sys;
}

FlowRate flow_rate_from(const CandidateSpec& c) {
  const auto e = expr::Expression::parse(c.p, {"t"});
  FlowRate p;
  p.name = c.p;
  p.p = [e](double t) { return e({t}); };
  if (c.p_hint == "constant") {
    p.hint = TailHint::Constant;
    p.value = e({0.0});
    if (e.uses("t")) throw ConfigError("[candidate]: p_hint 'constant' but p depends on t");
  } else if (c.p_hint == "constant-after") {
    p.hint = TailHint::ConstantAfter;
    p.t_max = c.p_t_max;
  } else if (c.p_hint == "periodic") {
    p.hint = TailHint::Periodic;
    p.period = c.p_period;
  } else if (c.p_hint == "monotone") {
    p.hint = TailHint::Monotone;
  }
  return p;
}

std::optional<LyapunovCandidate> build_candidate(const RunConfig& cfg) {
  if (!cfg.candidate) {
    if (cfg.system.preset.empty()) return std::nullopt;
    return get_preset(cfg.system.preset).candidate;
  }
  const auto& c = *cfg.candidate;
  LyapunovCandidate cand;
  cand.name = "V = " + c.V;
  const auto V = expr::Expression::parse(c.V, state_vars(cfg.system.n, 0));
  cand.V = [V](double t, const Vec& x) {
    std::vector<double> v{t};
    v.insert(v.end(), x.data(), x.data() + x.size());
    return V(v);
  };
  cand.phi1 = expr::rate_from_expression("phi1", c.phi1, RateClass::Kinf);
  cand.phi2 = expr::rate_from_expression("phi2", c.phi2, RateClass::Kinf);
  cand.chi = expr::rate_from_expression("chi", c.chi, RateClass::Kinf);
  cand.pi = expr::rate_from_expression("pi", c.pi, RateClass::Kinf);
  cand.phi = expr::rate_from_expression("phi", c.phi, RateClass::P, c.phi_breakpoints);
  cand.psi = expr::rate_from_expression("psi", c.psi, RateClass::P, c.psi_breakpoints);
  cand.p = flow_rate_from(c);
  cand.regime = c.regime == "growth" ? Regime::Growth : Regime::Decay;
  cand.escape_declared_divergent = c.escape_declared_divergent;
  return cand;
}

std::string system_hash(const RunConfig& cfg) {
  if (!cfg.system.preset.empty() && !cfg.candidate) return get_preset(cfg.system.preset).hash;
  return hex64(fnv1a64(serialize_system(cfg)));
}

std::vector<ImpulseSequence> build_sequences(const SequenceSpec& spec, double horizon,
                                             std::uint64_t seed) {
  std::vector<ImpulseSequence> out;
  const auto n0 = static_cast<std::size_t>(spec.n0);
  const auto draws = [&](auto make) {
    for (int i = 0; i < spec.count; ++i) {
      out.push_back(make(derive_seed(seed, static_cast<std::uint64_t>(i))));
    }
  };
  if (spec.kind == "none") {
    out.emplace_back(std::vector<double>{}, horizon, "none");
  } else if (spec.kind == "explicit") {
    out.emplace_back(spec.instants, horizon, "explicit");
  } else if (spec.kind == "adt") {
    draws([&](std::uint64_t s) { return make_adt(n0, spec.tau, s, horizon); });
  } else if (spec.kind == "reverse-adt") {
    draws([&](std::uint64_t s) { return make_reverse_adt(n0, spec.tau, s, horizon); });
  } else if (spec.kind == "fixed-dwell") {
    draws([&](std::uint64_t s) { return make_fixed_dwell(spec.theta1, spec.theta2, s, horizon); });
  } else if (spec.kind == "example1") {
    out.push_back(make_example1(horizon));
  } else if (spec.kind == "example2-slow") {
    out.push_back(make_example2(Example2Direction::Slow, horizon));
  } else if (spec.kind == "example2-fast") {
    out.push_back(make_example2(Example2Direction::Fast, horizon));
  } else if (spec.kind == "example3") {
    out.push_back(make_example3(n0, horizon));
  } else {
    throw ConfigError("[sequence]: unknown kind '" + spec.kind + "'");
  }
  return out;
}

InputSignal build_input(const ExperimentSpec& spec, int m) {
  if (spec.input == "zero") return InputSignal::zero(m);
  if (spec.input == "constant") {
    return InputSignal::constant(Eigen::Map<const Vec>(spec.input_value.data(), m));
  }
  std::vector<expr::Expression> ex;
  for (const auto& e : spec.input_expr) ex.push_back(expr::Expression::parse(e, {"t"}));
  InputSignal u;
  u.dim = m;
  u.label = "expression";
  u.eval = [ex, m](double t) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v[i] = ex[static_cast<std::size_t>(i)]({t});
    return v;
  };
  return u;
}

Tolerances tolerance_profile(const std::string& name) {
  if (name == "default") return {};
  if (name == "tight") return Tolerances::tight();
  throw ConfigError("unknown tolerance profile '" + name + "'");
}

}  // namespace iiss::config
