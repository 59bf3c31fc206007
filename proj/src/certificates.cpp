#include "iiss/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "iiss/errors.hpp"
#include "iiss/io.hpp"
#include "iiss/numerics.hpp"
#include "iiss/parallel.hpp"

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) { return io::format_double(x); }

}  // namespace

std::string to_string(TailHint h) {
  switch (h) {
    case TailHint::None:
      return "none";
    case TailHint::Constant:
      return "constant";
    case TailHint::ConstantAfter:
      return "constant-after";
    case TailHint::Periodic:
      return "periodic";
    case TailHint::Monotone:
      return "monotone";
  }
  return "none";
}

std::string to_string(Regime r) { return r == Regime::Decay ? "decay" : "growth"; }

FlowRate FlowRate::constant(double c) {
  FlowRate r;
  r.name = fmt(c);
  r.p = [c](double) { return c; };
  r.hint = TailHint::Constant;
  r.value = c;
  r.antiderivative = [c](double t) { return c * t; };
  return r;
}

FlowRate FlowRate::tanh_rate() {
  FlowRate r;
  r.name = "tanh";
  r.p = [](double t) { return std::tanh(t); };
  r.hint = TailHint::Monotone;
  r.antiderivative = [](double t) { return num::log_cosh(t); };
  return r;
}

double FlowRate::integral(double a, double b) const {
  if (hint == TailHint::Constant) {
    return value * (b - a);
  }
  if (antiderivative) {
    return antiderivative(b) - antiderivative(a);
  }
  return num::integrate_split(p, a, b, breakpoints, 1e-11, 1e-14).value;
}

double LyapunovCandidate::signed_phi(double s) const {
  const double v = phi(s);
  return regime == Regime::Decay ? v : -v;
}

namespace {

struct Evaluated {
  double value = 0.0;
  double error = 0.0;
};

// Shared scan-and-refine for M and M₂. `objective` returns the signed integral
// at a; `maximize` selects sup versus inf.
ExtremumResult search_over_a(const std::function<Evaluated(double)>& objective,
                             const SearchSpec& spec, bool maximize) {
  const auto grid = num::log_grid(spec.a_min, spec.a_max, spec.grid);
  std::vector<Evaluated> vals(grid.size());
  parallel_for(grid.size(), spec.threads, [&](std::size_t i) { vals[i] = objective(grid[i]); });

  const auto better = [maximize](double x, double y) { return maximize ? x > y : x < y; };
  // The first and last 1% of the grid count as the boundary zone.
  const std::size_t edge = std::max<std::size_t>(1, grid.size() / 100);
  std::size_t best_in = edge;
  for (std::size_t i = edge; i + edge < grid.size(); ++i) {
    if (better(vals[i].value, vals[best_in].value)) best_in = i;
  }
  std::size_t best_edge = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i >= edge && i + edge < grid.size()) continue;
    if (better(vals[i].value, vals[best_edge].value)) best_edge = i;
  }

  ExtremumResult res;
  const double interior = vals[best_in].value;
  const double boundary = vals[best_edge].value;
  if (better(boundary, interior) &&
      std::abs(boundary - interior) > 1e-9 * (1.0 + std::abs(interior))) {
    res.value = boundary;
    res.arg = grid[best_edge];
    res.quad_error = vals[best_edge].error;
    res.boundary = true;
    res.warnings.push_back("extremum attained at the search boundary a = " + fmt(res.arg) +
                           "; the true value may lie outside [" + fmt(spec.a_min) + ", " +
                           fmt(spec.a_max) + "]");
    return res;
  }

  const double lo = std::log(grid[best_in - 1]);
  const double hi = std::log(grid[best_in + 1]);
  const auto in_log = [&](double u) { return objective(std::exp(u)).value; };
  const auto refined = maximize ? num::golden_max(in_log, lo, hi, spec.arg_tol)
                                : num::golden_min(in_log, lo, hi, spec.arg_tol);
  if (better(refined.value, interior)) {
    res.arg = std::exp(refined.arg);
    const auto e = objective(res.arg);
    res.value = e.value;
    res.quad_error = e.error;
  } else {
    res.arg = grid[best_in];
    res.value = interior;
    res.quad_error = vals[best_in].error;
  }
  return res;
}

Evaluated reciprocal(const RateFunction& rate, double lo, double hi, double rtol) {
  if (lo == hi) {
    return {};
  }
  const auto q = reciprocal_integral(rate, lo, hi, rtol);
  return {q.value, q.error};
}

}  // namespace

ExtremumResult compute_M(const RateFunction& phi, const RateFunction& psi,
                         const SearchSpec& spec) {
  if (psi.is_identity()) {
    ExtremumResult r;
    r.arg = 1.0;
    r.warnings.push_back("psi is the identity; M = 0 without quadrature");
    return r;
  }
  return search_over_a(
      [&](double a) { return reciprocal(phi, a, psi(a), spec.quad_rtol); }, spec, true);
}

ExtremumResult compute_M2(const RateFunction& neg_phi, const RateFunction& psi,
                          const SearchSpec& spec) {
  if (psi.is_identity()) {
    ExtremumResult r;
    r.arg = 1.0;
    r.warnings.push_back("psi is the identity; M2 = 0 without quadrature");
    return r;
  }
  auto res = search_over_a(
      [&](double a) { return reciprocal(neg_phi, psi(a), a, spec.quad_rtol); }, spec, false);
  if (!(res.value > 0.0)) {
    res.warnings.push_back("psi(a) >= a somewhere in the search range; M2 is not positive");
  }
  return res;
}

namespace {

ExtremumResult scan_window(const std::function<double(double)>& W, double t_lo, double t_hi,
                           ExtremumMode mode, const WindowSpec& spec) {
  const bool maximize = mode == ExtremumMode::Sup;
  const auto better = [maximize](double x, double y) { return maximize ? x > y : x < y; };
  const auto grid = num::linear_grid(t_lo, t_hi, spec.grid);
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = W(grid[i]);
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (better(vals[i], vals[best])) best = i;
  }
  ExtremumResult res;
  res.arg = grid[best];
  res.value = vals[best];
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    const auto r = maximize ? num::golden_max(W, lo, hi, spec.arg_tol * (1.0 + hi))
                            : num::golden_min(W, lo, hi, spec.arg_tol * (1.0 + hi));
    if (better(r.value, res.value)) {
      res.arg = r.arg;
      res.value = r.value;
    }
  }
  return res;
}

// Window integral at large t by direct quadrature (no antiderivative
// cancellation), continued along a ladder until it settles.
std::pair<double, bool> tail_limit(const FlowRate& p, double theta) {
  double prev = kInf;
  double t = 10.0 * theta;
  for (int k = 0; k < 12; ++k, t *= 10.0) {
    const double w = num::adaptive_simpson(p.p, t, t + theta, 1e-12, 1e-15).value;
    if (std::abs(w - prev) <= 1e-12 * (1.0 + std::abs(w))) {
      return {w, true};
    }
    prev = w;
  }
  return {prev, false};
}

}  // namespace

ExtremumResult compute_N(const FlowRate& p, double theta, ExtremumMode mode,
                         const WindowSpec& spec) {
  if (!(theta > 0.0)) {
    throw PreconditionError("compute_N needs theta > 0");
  }
  const auto W = [&](double t) { return p.integral(t, t + theta); };
  const bool maximize = mode == ExtremumMode::Sup;
  const auto better = [maximize](double x, double y) { return maximize ? x > y : x < y; };
  ExtremumResult res;
  switch (p.hint) {
    case TailHint::Constant:
      res.value = p.value * theta;
      res.arg = 0.0;
      return res;
    case TailHint::ConstantAfter: {
      res = scan_window(W, 0.0, p.t_max, mode, spec);
      const double tail = p.p(p.t_max) * theta;
      if (better(tail, res.value)) {
        res.value = tail;
        res.arg = p.t_max;
      }
      return res;
    }
    case TailHint::Periodic:
      if (!(p.period > 0.0)) throw PreconditionError("periodic flow rate needs a period > 0");
      return scan_window(W, 0.0, p.period, mode, spec);
    case TailHint::Monotone: {
      const double w0 = W(0.0);
      const auto [winf, settled] = tail_limit(p, theta);
      if (!settled) {
        res.warnings.push_back("window integral did not settle along the tail ladder");
      }
      if (better(winf, w0)) {
        res.value = winf;
        res.arg = kInf;
        res.warnings.push_back("extremum attained only in the limit t -> infinity");
      } else {
        res.value = w0;
        res.arg = 0.0;
      }
      return res;
    }
    case TailHint::None: {
      const double t_scan = spec.scan_multiple * theta;
      res = scan_window(W, 0.0, t_scan, mode, spec);
      const auto head = scan_window(W, 0.0, 0.9 * t_scan, mode, spec);
      if (better(res.value, head.value) &&
          std::abs(res.value - head.value) > 1e-9 * (1.0 + std::abs(head.value))) {
        throw InconclusiveError("flow rate '" + p.name +
                                "' has no tail hint and its window integral is still moving at t = " +
                                fmt(t_scan));
      }
      res.warnings.push_back("no tail hint: extremum taken from a scan of [0, " + fmt(t_scan) +
                             "]");
      return res;
    }
  }
  return res;
}

std::string to_string(EscapeVerdict v) {
  switch (v) {
    case EscapeVerdict::DivergentConsistent:
      return "divergent-consistent";
    case EscapeVerdict::Convergent:
      return "convergent";
    case EscapeVerdict::Inconclusive:
      return "inconclusive";
    case EscapeVerdict::DeclaredDivergent:
      return "declared-divergent";
  }
  return "inconclusive";
}

EscapeReport check_escape_integral(const RateFunction& neg_phi, const EscapeProbe& probe) {
  EscapeReport rep;
  if (probe.declared_divergent) {
    rep.verdict = EscapeVerdict::DeclaredDivergent;
    rep.note = "divergence declared by the user, not probed";
    return rep;
  }
  double total = 0.0;
  double lo = 1.0;
  std::vector<double> increments;
  try {
    for (double A = probe.factor; A <= probe.A_max * (1.0 + 1e-12); A *= probe.factor) {
      total += reciprocal_integral(neg_phi, lo, A, 1e-11).value;
      increments.push_back(total - (rep.partials.empty() ? 0.0 : rep.partials.back()));
      rep.ladder.push_back(A);
      rep.partials.push_back(total);
      lo = A;
    }
  } catch (const Error& e) {
    rep.verdict = EscapeVerdict::Inconclusive;
    rep.note = std::string("evaluation failed on the ladder: ") + e.what();
    return rep;
  }
  if (increments.size() < 3) {
    rep.verdict = EscapeVerdict::Inconclusive;
    rep.note = "ladder too short";
    return rep;
  }
  rep.limit = total;
  const std::size_t n = increments.size();
  const bool shrinking = increments[n - 1] <= increments[n - 2] && increments[n - 2] <= increments[n - 3];
  if (shrinking && increments[n - 1] <= probe.tol * std::max(1.0, std::abs(total))) {
    rep.verdict = EscapeVerdict::Convergent;
    rep.note = "partial integrals settle at " + fmt(total);
  } else {
    rep.verdict = EscapeVerdict::DivergentConsistent;
    rep.note = "partial integrals still growing at A = " + fmt(rep.ladder.back()) +
               "; divergence is consistent with the probe, not proven";
  }
  return rep;
}

std::string to_string(TheoremCase c) {
  switch (c) {
    case TheoremCase::Thm1a:
      return "Thm1-a";
    case TheoremCase::Thm1b:
      return "Thm1-b";
    case TheoremCase::Thm1c:
      return "Thm1-c";
    case TheoremCase::Thm2:
      return "Thm2";
    case TheoremCase::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::string to_string(Strength s) {
  switch (s) {
    case Strength::Weak:
      return "weak";
    case Strength::Strong:
      return "strong";
    case Strength::None:
      return "none";
  }
  return "none";
}

namespace {

void hint_caveat(StabilityVerdict& v, const FlowRate& p) {
  v.warnings.push_back("flow-rate extremum over t >= 0 resolved with tail hint '" +
                       to_string(p.hint) + "'");
}

}  // namespace

StabilityVerdict theorem1_verdict(const LyapunovCandidate& cand, double theta,
                                  const VerdictOptions& opts) {
  StabilityVerdict v;
  v.theta = theta;
  if (cand.regime != Regime::Decay) {
    v.warnings.push_back("candidate is in the growth regime; the decay certificate needs phi in P");
    return v;
  }
  const auto M = compute_M(cand.phi, cand.psi, opts.search);
  const auto N = compute_N(cand.p, theta, ExtremumMode::Inf, opts.window);
  v.M = M.value;
  v.N = N.value;
  v.a_star = M.arg;
  v.t_star = N.arg;
  v.quadrature_error = M.quad_error;
  v.warnings.insert(v.warnings.end(), M.warnings.begin(), M.warnings.end());
  v.warnings.insert(v.warnings.end(), N.warnings.begin(), N.warnings.end());
  hint_caveat(v, cand.p);
  if (M.boundary) {
    v.warnings.push_back("M attained at the search boundary; verdict downgraded");
    return v;
  }
  const double tol = opts.tol_zero;
  if (v.M > tol) {
    if (v.M < v.N) {
      v.theorem = TheoremCase::Thm1a;
      v.strength = Strength::Strong;
      v.class_kind = "Sup";
      v.class_rho = 1.0 / theta;
      v.class_text = "any S with S uniformly inside Sup(" + fmt(v.class_rho) + ")";
    } else {
      v.warnings.push_back("condition M < N fails: M = " + fmt(v.M) + ", N = " + fmt(v.N));
    }
  } else if (std::abs(v.M) <= tol) {
    if (v.N > 0.0) {
      v.theorem = TheoremCase::Thm1b;
      v.strength = Strength::Weak;
      v.class_kind = "Gamma";
      v.class_text = "weak over Gamma; strong over any UIB family";
    } else {
      v.warnings.push_back("condition N > 0 fails: N = " + fmt(v.N));
    }
  } else {
    if (v.N > 0.0) {
      v.theorem = TheoremCase::Thm1c;
      v.strength = Strength::Strong;
      v.class_kind = "Gamma";
      v.class_text = "Gamma";
    } else {
      v.warnings.push_back("condition N > 0 fails: N = " + fmt(v.N));
    }
  }
  return v;
}

StabilityVerdict theorem2_verdict(const LyapunovCandidate& cand, double theta,
                                  const VerdictOptions& opts) {
  StabilityVerdict v;
  v.theta = theta;
  if (cand.regime != Regime::Growth) {
    v.warnings.push_back("candidate is in the decay regime; the growth certificate needs -phi in P");
    return v;
  }
  const auto M2 = compute_M2(cand.phi, cand.psi, opts.search);
  const auto N2 = compute_N(cand.p, theta, ExtremumMode::Sup, opts.window);
  auto probe = opts.escape;
  probe.declared_divergent = probe.declared_divergent || cand.escape_declared_divergent;
  v.escape = check_escape_integral(cand.phi, probe);
  v.M = M2.value;
  v.N = N2.value;
  v.a_star = M2.arg;
  v.t_star = N2.arg;
  v.quadrature_error = M2.quad_error;
  v.warnings.insert(v.warnings.end(), M2.warnings.begin(), M2.warnings.end());
  v.warnings.insert(v.warnings.end(), N2.warnings.begin(), N2.warnings.end());
  hint_caveat(v, cand.p);
  if (M2.boundary) {
    v.warnings.push_back("M2 attained at the search boundary; verdict downgraded");
    return v;
  }
  const bool divergent = v.escape->verdict == EscapeVerdict::DivergentConsistent ||
                         v.escape->verdict == EscapeVerdict::DeclaredDivergent;
  if (!divergent) {
    v.warnings.push_back("escape integral condition fails: " + to_string(v.escape->verdict) +
                         " (" + v.escape->note + ")");
    return v;
  }
  if (!(v.M > v.N)) {
    v.warnings.push_back("condition M2 > N2 fails: M2 = " + fmt(v.M) + ", N2 = " + fmt(v.N));
    return v;
  }
  v.warnings.push_back("escape integral: " + v.escape->note);
  v.theorem = TheoremCase::Thm2;
  v.strength = Strength::Strong;
  v.class_kind = "Sdn";
  v.class_rho = 1.0 / theta;
  v.class_text = "any S with S uniformly inside Sdn(" + fmt(v.class_rho) + ")";
  return v;
}

namespace {

struct Recorder {
  CandidateReport& rep;
  double tol;

  // Records lhs ≤ rhs with tolerance tol·max(1, |rhs|); returns the margin.
  double check(const char* cond, double t, const Vec& xi, const Vec& mu, double lhs, double rhs) {
    const double margin = rhs - lhs;
    if (!std::isfinite(lhs) || !std::isfinite(rhs)) {
      push("non-finite", t, xi, mu, lhs, rhs);
      return margin;
    }
    if (margin < -tol * std::max(1.0, std::abs(rhs))) {
      push(cond, t, xi, mu, lhs, rhs);
    }
    return margin;
  }

  void push(const char* cond, double t, const Vec& xi, const Vec& mu, double lhs, double rhs) {
    if (rep.violations.size() < 1000) {
      rep.violations.push_back({cond, t, xi, mu, lhs, rhs});
    }
  }
};

}  // namespace

CandidateReport validate_candidate(const LyapunovCandidate& cand, const ImpulsiveSystem& sys,
                                   const CandidateSampleSpec& spec) {
  CandidateReport rep;
  Recorder rec{rep, spec.margin_tol};

  std::vector<Vec> xis;
  std::vector<Vec> mus;
  if (sys.n == 1 && sys.m <= 1) {
    for (double x : num::linear_grid(-spec.xi_box, spec.xi_box, spec.xi_count)) {
      xis.push_back(Vec::Constant(1, x));
    }
    if (sys.m == 0) {
      mus.push_back(Vec(0));
    } else {
      for (double u : num::linear_grid(-spec.mu_box, spec.mu_box, spec.mu_count)) {
        mus.push_back(Vec::Constant(1, u));
      }
    }
  } else {
    std::mt19937_64 gen(spec.seed);
    std::uniform_real_distribution<double> X(-spec.xi_box, spec.xi_box);
    std::uniform_real_distribution<double> U(-spec.mu_box, spec.mu_box);
    for (std::size_t i = 0; i < spec.random_points; ++i) {
      Vec x(sys.n);
      for (int j = 0; j < sys.n; ++j) x[j] = X(gen);
      xis.push_back(x);
    }
    const std::size_t nm = sys.m == 0 ? 1 : std::max<std::size_t>(1, spec.mu_count);
    for (std::size_t i = 0; i < nm; ++i) {
      Vec u(sys.m);
      for (int j = 0; j < sys.m; ++j) u[j] = U(gen);
      mus.push_back(u);
    }
  }

  const auto fold = [](double& worst, double m) { worst = std::min(worst, m); };
  for (double t : spec.times) {
    for (const auto& xi : xis) {
      double V0 = 0.0;
      try {
        V0 = cand.V(t, xi);
        const double lo = cand.phi1(sys.h(t, xi));
        const double hi = cand.phi2(sys.h0(t, xi));
        fold(rep.worst_margin_bound1, rec.check("bound1-lower", t, xi, Vec(0), lo, V0));
        fold(rep.worst_margin_bound1, rec.check("bound1-upper", t, xi, Vec(0), V0, hi));
      } catch (const Error&) {
        rec.push("non-finite", t, xi, Vec(0), NAN, NAN);
        continue;
      }
      for (const auto& mu : mus) {
        ++rep.points;
        try {
          const double mu_abs = sys.m == 0 ? 0.0 : mu.norm();
          const double chi = cand.chi(mu_abs);
          const Vec fx = sys.f(t, xi, mu);
          const Vec after = xi + sys.g(t, xi, mu);
          const double V_after = cand.V(t, after);
          if (V0 >= chi) {
            // Upper-right Dini derivative: linear Richardson extrapolation
            // over consecutive rungs of the h-ladder, maximized.
            double dini = -kInf;
            double q_prev = NAN;
            double h_prev = NAN;
            for (double h : spec.dini_steps) {
              const double q = (cand.V(t + h, xi + h * fx) - V0) / h;
              if (std::isfinite(q_prev)) {
                dini = std::max(dini, q + (q - q_prev) * h / (h_prev - h));
              }
              q_prev = q;
              h_prev = h;
            }
            if (spec.dini_steps.size() == 1) dini = q_prev;
            const double rhs = -cand.p(t) * cand.signed_phi(V0);
            fold(rep.worst_margin_bi, rec.check("b-i", t, xi, mu, dini, rhs));
            fold(rep.worst_margin_bii, rec.check("b-ii", t, xi, mu, V_after, cand.psi(V0)));
          }
          if (V0 <= chi) {
            fold(rep.worst_margin_biii, rec.check("b-iii", t, xi, mu, V_after, cand.pi(mu_abs)));
          }
        } catch (const Error&) {
          rec.push("non-finite", t, xi, mu, NAN, NAN);
        }
      }
    }
  }
  return rep;
}

}  // namespace iiss
