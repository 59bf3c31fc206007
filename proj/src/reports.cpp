#include "iiss/reports.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace iiss::reports {

namespace {

using json = nlohmann::ordered_json;

// JSON has no infinities; they are written as strings.
json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json context(const Context& c) {
  json j;
  j["system"] = c.system;
  j["hash"] = c.hash;
  if (c.seed) j["seed"] = *c.seed;
  if (c.tolerances) {
    const auto& t = *c.tolerances;
    j["tolerances"] = {{"atol", t.atol},   {"rtol", t.rtol},   {"h_init", t.h_init},
                       {"h_min", t.h_min}, {"h_max", t.h_max}, {"max_steps", t.max_steps},
                       {"blowup", t.blowup}};
  }
  if (c.horizon) j["horizon"] = number(*c.horizon);
  return j;
}

json verdict_object(const StabilityVerdict& v) {
  json j;
  j["theorem"] = to_string(v.theorem);
  j["M"] = number(v.M);
  j["N"] = number(v.N);
  j["theta"] = v.theta;
  j["class"] = {{"kind", v.class_kind}, {"rho", number(v.class_rho)}, {"text", v.class_text}};
  j["strength"] = to_string(v.strength);
  j["warnings"] = v.warnings;
  j["diagnostics"] = {{"a_star", number(v.a_star)},
                      {"t_star", number(v.t_star)},
                      {"quadrature_error", number(v.quadrature_error)}};
  if (v.escape) {
    json e;
    e["verdict"] = to_string(v.escape->verdict);
    e["limit"] = number(v.escape->limit);
    e["note"] = v.escape->note;
    json ladder = json::array();
    for (std::size_t i = 0; i < v.escape->ladder.size(); ++i) {
      ladder.push_back({{"A", v.escape->ladder[i]}, {"partial", number(v.escape->partials[i])}});
    }
    e["ladder"] = ladder;
    j["escape"] = e;
  }
  return j;
}

json vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

}  // namespace

std::string verdict_json(const StabilityVerdict& v, const Context& ctx) {
  json j = verdict_object(v);
  j["provenance"] = context(ctx);
  return j.dump(2) + "\n";
}

std::string verdicts_json(const std::vector<StabilityVerdict>& v, const Context& ctx) {
  json j;
  j["provenance"] = context(ctx);
  j["verdicts"] = json::array();
  for (const auto& x : v) j["verdicts"].push_back(verdict_object(x));
  return j.dump(2) + "\n";
}

std::string candidate_json(const CandidateReport& r, const Context& ctx) {
  json j;
  j["clean"] = r.clean();
  j["points"] = r.points;
  j["worst_margin"] = {{"bound1", number(r.worst_margin_bound1)},
                       {"b-i", number(r.worst_margin_bi)},
                       {"b-ii", number(r.worst_margin_bii)},
                       {"b-iii", number(r.worst_margin_biii)}};
  j["violations"] = json::array();
  for (const auto& v : r.violations) {
    j["violations"].push_back({{"condition", v.condition},
                               {"t", v.t},
                               {"xi", vec(v.xi)},
                               {"mu", vec(v.mu)},
                               {"lhs", number(v.lhs)},
                               {"rhs", number(v.rhs)},
                               {"margin", number(v.margin())}});
  }
  j["provenance"] = context(ctx);
  return j.dump(2) + "\n";
}

std::string envelope_json(const DecayEnvelope& env, const Context& ctx) {
  json j = json::parse(env.json());
  j["kappa"] = env.kappa();
  j["provenance"] = context(ctx);
  return j.dump(2) + "\n";
}

std::string manifest_json(const std::vector<ManifestEntry>& runs, const Context& ctx,
                          const std::string& sequence_class, std::size_t failures) {
  json j;
  j["provenance"] = context(ctx);
  j["sequence_class"] = sequence_class;
  j["runs_total"] = runs.size();
  j["failures"] = failures;
  j["runs"] = json::array();
  for (const auto& r : runs) {
    json x0 = json::array();
    for (double v : r.x0) x0.push_back(number(v));
    j["runs"].push_back({{"label", r.label},
                         {"seed", r.seed},
                         {"t0", r.t0},
                         {"x0", x0},
                         {"status", r.status},
                         {"jumps", r.jumps},
                         {"files", r.files}});
  }
  return j.dump(2) + "\n";
}

std::string classify_json(const ClassifyReport& r) {
  json j;
  j["sequence"] = r.sequence;
  j["horizon"] = number(r.horizon);
  j["impulses"] = r.impulses;
  j["adt"] = json::array();
  for (const auto& a : r.adt) {
    json e{{"n0", a.n0}, {"tau", a.tau}, {"pass", a.check.pass}};
    if (!a.check.pass) {
      e["witness"] = {{"s", a.check.s},
                      {"t", a.check.t},
                      {"count", a.check.count},
                      {"bound", a.check.bound}};
    }
    j["adt"].push_back(e);
  }
  j["frequency"] = json::array();
  for (const auto& f : r.freq) {
    json e{{"rho", f.rho}, {"eps", f.eps}, {"pass", f.T.has_value()}};
    e["T"] = f.T ? json(*f.T) : json("not-found");
    j["frequency"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::string bound_json(const BoundReport& r) {
  json j{{"pass", r.pass},
         {"checked", r.checked},
         {"vacuous", r.vacuous},
         {"worst_margin", number(r.worst_margin)},
         {"worst_run", r.worst_run},
         {"worst_t", number(r.worst_t)}};
  return j.dump(2) + "\n";
}

std::string descent_json(const DescentReport& r) {
  json j{{"pass", r.pass},
         {"windows", r.windows},
         {"worst_margin", number(r.worst_margin)},
         {"worst_start", number(r.worst_start)}};
  return j.dump(2) + "\n";
}

}  // namespace iiss::reports
