#include "iiss/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "iiss/errors.hpp"
#include "iiss/io.hpp"

namespace iiss {

namespace {

// Portable uniform draw on [0, 1) from the raw 64-bit engine output; the
// standard distributions are implementation-defined.
double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& gen, double mean) {
  return -mean * std::log1p(-uniform01(gen));
}

std::string fmt(double x) { return io::format_double(x); }

// Relative slack for floating comparisons of count-versus-length bounds.
double slack(double scale) { return 1e-9 * (1.0 + std::abs(scale)); }

}  // namespace

ImpulseSequence::ImpulseSequence(std::vector<double> instants, double horizon, std::string label)
    : horizon_(horizon), label_(std::move(label)) {
  if (!(horizon > 0.0)) {
    throw PreconditionError("sequence horizon must be positive");
  }
  for (std::size_t i = 0; i < instants.size(); ++i) {
    const double t = instants[i];
    if (!std::isfinite(t) || !(t > 0.0)) {
      throw PreconditionError("impulse instant " + fmt(t) + " is not a positive finite time");
    }
    if (i > 0 && !(t > instants[i - 1])) {
      throw PreconditionError("impulse instants not strictly increasing at index " +
                              std::to_string(i + 1));
    }
  }
  const auto end = std::upper_bound(instants.begin(), instants.end(), horizon);
  instants.erase(end, instants.end());
  tau_ = std::move(instants);
}

double ImpulseSequence::at(std::size_t k) const {
  if (k == 0 || k > tau_.size()) {
    throw HorizonError("impulse index " + std::to_string(k) + " not materialized (have " +
                       std::to_string(tau_.size()) + " up to horizon " + fmt(horizon_) + ")");
  }
  return tau_[k - 1];
}

void ImpulseSequence::require_within(double t) const {
  if (t > horizon_) {
    throw HorizonError("query at t = " + fmt(t) + " beyond horizon " + fmt(horizon_) + " of '" +
                       label_ + "'");
  }
}

std::size_t ImpulseSequence::count(double s, double t) const {
  if (t < s) {
    throw PreconditionError("count needs s <= t");
  }
  require_within(t);
  const auto lo = std::upper_bound(tau_.begin(), tau_.end(), s);
  const auto hi = std::upper_bound(tau_.begin(), tau_.end(), t);
  return static_cast<std::size_t>(hi - lo);
}

std::vector<double> ImpulseSequence::between(double s, double t) const {
  require_within(t);
  const auto lo = std::upper_bound(tau_.begin(), tau_.end(), s);
  const auto hi = std::upper_bound(tau_.begin(), tau_.end(), t);
  return {lo, hi};
}

ImpulseSequence ImpulseSequence::truncated(double h) const {
  require_within(h);
  return ImpulseSequence(tau_, h, label_);
}

std::string ImpulseSequence::serialize() const {
  std::string out;
  for (double t : tau_) {
    out += fmt(t);
    out += '\n';
  }
  return out;
}

ImpulseSequence ImpulseSequence::deserialize(const std::string& text, double horizon) {
  std::vector<double> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.push_back(io::parse_double(line));
  }
  return ImpulseSequence(std::move(v), horizon);
}

std::string to_string(SequenceClass c) {
  switch (c) {
    case SequenceClass::ADT:
      return "ADT";
    case SequenceClass::ReverseADT:
      return "ReverseADT";
    case SequenceClass::FixedDwell:
      return "FixedDwell";
    case SequenceClass::FreqUpper:
      return "Sup";
    case SequenceClass::FreqLower:
      return "Sdn";
    case SequenceClass::UniformLimit:
      return "Slim";
  }
  return "?";
}

ClassDescriptor ClassDescriptor::adt(double n0, double tau) {
  ClassDescriptor c;
  c.kind = SequenceClass::ADT;
  c.n0 = n0;
  c.tau = tau;
  c.witness = [n0](double eps) { return n0 / eps; };
  return c;
}

ClassDescriptor ClassDescriptor::reverse_adt(double n0, double tau) {
  ClassDescriptor c = adt(n0, tau);
  c.kind = SequenceClass::ReverseADT;
  return c;
}

ClassDescriptor ClassDescriptor::fixed_dwell(double theta1, double theta2) {
  ClassDescriptor c;
  c.kind = SequenceClass::FixedDwell;
  c.theta1 = theta1;
  c.theta2 = theta2;
  // Sf(θ₁,θ₂) ⊂ Sad(1,θ₁) ∩ Srad(1,θ₂), so the ADT witness with n₀ = 1 applies.
  c.witness = [](double eps) { return 1.0 / eps; };
  return c;
}

ClassDescriptor ClassDescriptor::freq_upper(double rho) {
  ClassDescriptor c;
  c.kind = SequenceClass::FreqUpper;
  c.rho = rho;
  return c;
}

ClassDescriptor ClassDescriptor::freq_lower(double rho) {
  ClassDescriptor c;
  c.kind = SequenceClass::FreqLower;
  c.rho = rho;
  return c;
}

void ClassDescriptor::validate() const {
  switch (kind) {
    case SequenceClass::ADT:
    case SequenceClass::ReverseADT:
      if (!(tau > 0.0)) throw PreconditionError("class " + describe() + ": tau must be > 0");
      if (!(n0 >= 0.0)) throw PreconditionError("class " + describe() + ": n0 must be >= 0");
      break;
    case SequenceClass::FixedDwell:
      if (!(theta1 > 0.0) || theta1 > theta2) {
        throw PreconditionError("class " + describe() + ": need 0 < theta1 <= theta2");
      }
      break;
    default:
      if (!(rho >= 0.0)) throw PreconditionError("class " + describe() + ": rho must be >= 0");
  }
}

std::string ClassDescriptor::describe() const {
  switch (kind) {
    case SequenceClass::ADT:
      return "Sad(" + fmt(n0) + "," + fmt(tau) + ")";
    case SequenceClass::ReverseADT:
      return "Srad(" + fmt(n0) + "," + fmt(tau) + ")";
    case SequenceClass::FixedDwell:
      return "Sf(" + fmt(theta1) + "," + fmt(theta2) + ")";
    case SequenceClass::FreqUpper:
      return "Sup(" + fmt(rho) + ")";
    case SequenceClass::FreqLower:
      return "Sdn(" + fmt(rho) + ")";
    case SequenceClass::UniformLimit:
      return "Slim(" + fmt(rho) + ")";
  }
  return "?";
}

ImpulseSequence make_adt(std::size_t n0, double tau, std::uint64_t seed, double horizon) {
  if (n0 < 1 || !(tau > 0.0)) {
    throw PreconditionError("make_adt needs n0 >= 1 and tau > 0");
  }
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  // Window (τ_j⁻, τ_k] holds k−j+1 instants, so τ_k ≥ (τ_j − jτ) + τ(k+1−n₀)
  // for every j < k. run_max tracks max_j (τ_j − jτ).
  double run_max = -std::numeric_limits<double>::infinity();
  double prev = 0.0;
  const double n0d = static_cast<double>(n0);
  for (std::size_t k = 1;; ++k) {
    const double kd = static_cast<double>(k);
    const double earliest =
        std::max(prev, std::isfinite(run_max) ? run_max + tau * (kd + 1.0 - n0d) : 0.0);
    double cand = -1.0;
    for (int attempt = 0; attempt < 16; ++attempt) {
      const double c = prev + exponential(gen, tau);
      if (c > prev && c >= earliest + slack(earliest) * tau) {
        cand = c;
        break;
      }
    }
    if (cand < 0.0) {
      cand = earliest + tau * (1e-6 + uniform01(gen));
    }
    if (cand > horizon) {
      break;
    }
    out.push_back(cand);
    run_max = std::max(run_max, cand - kd * tau);
    prev = cand;
  }
  return ImpulseSequence(std::move(out), horizon,
                         "adt(" + std::to_string(n0) + "," + fmt(tau) + ")");
}

ImpulseSequence make_reverse_adt(std::size_t n0, double tau, std::uint64_t seed, double horizon) {
  if (n0 < 1 || !(tau > 0.0)) {
    throw PreconditionError("make_reverse_adt needs n0 >= 1 and tau > 0");
  }
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  // Gap (τ_j, τ_k) holds k−j−1 instants, so τ_k ≤ (τ_j − jτ) + τ(k−1+n₀)
  // for every j < k, with τ₀ = 0. run_min tracks min_j (τ_j − jτ).
  double run_min = 0.0;
  double prev = 0.0;
  const double n0d = static_cast<double>(n0);
  for (std::size_t k = 1;; ++k) {
    const double kd = static_cast<double>(k);
    const double latest = run_min + tau * (kd - 1.0 + n0d);
    double cand = -1.0;
    for (int attempt = 0; attempt < 16; ++attempt) {
      const double c = prev + exponential(gen, tau);
      if (c > prev && c <= latest - slack(latest) * tau) {
        cand = c;
        break;
      }
    }
    if (cand < 0.0) {
      const double hi = latest - slack(latest) * tau;
      cand = prev + (hi - prev) * (1.0 - uniform01(gen));
    }
    if (cand > horizon) {
      break;
    }
    out.push_back(cand);
    run_min = std::min(run_min, cand - kd * tau);
    prev = cand;
  }
  return ImpulseSequence(std::move(out), horizon,
                         "reverse-adt(" + std::to_string(n0) + "," + fmt(tau) + ")");
}

ImpulseSequence make_fixed_dwell(double theta1, double theta2, std::uint64_t seed,
                                 double horizon) {
  if (!(theta1 > 0.0) || theta1 > theta2) {
    throw PreconditionError("make_fixed_dwell needs 0 < theta1 <= theta2");
  }
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  double t = theta2 * (1.0 - uniform01(gen));
  while (t <= horizon) {
    out.push_back(t);
    t += theta1 + (theta2 - theta1) * uniform01(gen);
  }
  return ImpulseSequence(std::move(out), horizon,
                         "fixed-dwell(" + fmt(theta1) + "," + fmt(theta2) + ")");
}

ImpulseSequence make_example1(double horizon) {
  if (!(horizon >= 2.0)) {
    throw PreconditionError("make_example1 needs horizon >= 2");
  }
  std::vector<double> out{1.0, 1.5, 2.0};
  for (int l = 2;; ++l) {
    const double start = std::ldexp(1.0, l) - 1.0;
    if (start > horizon) {
      break;
    }
    const long p = 3L << (l - 2);
    for (long k = 0; k < p; ++k) {
      out.push_back(start + static_cast<double>(k) / static_cast<double>(p - 1));
    }
  }
  return ImpulseSequence(std::move(out), horizon, "example1");
}

ImpulseSequence make_example2(Example2Direction direction, double horizon) {
  if (!(horizon >= 1.0)) {
    throw PreconditionError("make_example2 needs horizon >= 1");
  }
  const double sign = direction == Example2Direction::Slow ? -1.0 : 1.0;
  std::vector<double> out{1.0};
  double harmonic = 0.0;  // Σ_{ℓ=2}^k 1/ℓ
  for (long k = 2;; ++k) {
    harmonic += 1.0 / static_cast<double>(k);
    const double t = static_cast<double>(k) + sign * harmonic;
    if (t > horizon) {
      break;
    }
    out.push_back(t);
  }
  return ImpulseSequence(std::move(out), horizon,
                         direction == Example2Direction::Slow ? "example2-slow" : "example2-fast");
}

ImpulseSequence make_example3(std::size_t n0, double horizon) {
  if (n0 < 2) {
    throw PreconditionError("make_example3 needs n0 >= 2");
  }
  const double n = static_cast<double>(n0);
  std::vector<double> out;
  for (long l = 1;; ++l) {
    const double ld = static_cast<double>(l);
    const double start = 1.0 + (ld - 1.0) * n;
    if (start > horizon) {
      break;
    }
    for (std::size_t k = 0; k < n0; ++k) {
      out.push_back(start + static_cast<double>(k) / (ld - 1.0 + n));
    }
  }
  return ImpulseSequence(std::move(out), horizon, "example3(" + std::to_string(n0) + ")");
}

ImpulseSequence delta_perturb(const ImpulseSequence& gamma, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) {
    throw PreconditionError("delta_perturb needs delta >= 0");
  }
  if (delta == 0.0) {
    return gamma;
  }
  const double new_horizon = gamma.horizon() - delta;
  if (!(new_horizon > 0.0)) {
    throw PreconditionError("delta exceeds the sequence horizon");
  }
  std::mt19937_64 gen(seed);
  std::vector<double> out;
  out.reserve(gamma.size());
  double prev = 0.0;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const double tk = gamma.instants()[k];
    const double lo = std::max(tk - delta, prev);
    const double hi = tk + delta;
    // prev ≤ τ_{k−1} + Δ < τ_k + Δ, so (lo, hi] is never empty; the retry
    // budget only guards against a draw rounding onto lo.
    double v = -1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double c = lo + (hi - lo) * (1.0 - uniform01(gen));
      if (c > prev && c > 0.0) {
        v = c;
        break;
      }
    }
    if (v < 0.0) {
      throw Error("delta_perturb: no feasible instant near index " + std::to_string(k + 1));
    }
    out.push_back(v);
    prev = v;
  }
  return ImpulseSequence(std::move(out), new_horizon, gamma.label() + "+perturb(" + fmt(delta) + ")");
}

namespace {

std::vector<double> instants_upto(const ImpulseSequence& gamma, double horizon) {
  if (horizon > gamma.horizon()) {
    throw HorizonError("check horizon " + fmt(horizon) + " beyond sequence horizon " +
                       fmt(gamma.horizon()));
  }
  const auto& v = gamma.instants();
  return {v.begin(), std::upper_bound(v.begin(), v.end(), horizon)};
}

double just_below(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }

}  // namespace

AdtCheck verify_adt(const ImpulseSequence& gamma, double n0, double tau, double horizon) {
  if (!(tau > 0.0)) {
    throw PreconditionError("verify_adt needs tau > 0");
  }
  const auto t = instants_upto(gamma, horizon);
  AdtCheck res;
  // With d_i = i − τ_i/τ the bound on (τ_j⁻, τ_k] reads d_k − d_j ≤ n₀ − 1.
  double dmin = std::numeric_limits<double>::infinity();
  std::size_t jmin = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double dk = static_cast<double>(k) - t[k] / tau;
    if (dk < dmin) {
      dmin = dk;
      jmin = k;
    }
    if (dk - dmin > n0 - 1.0 + slack(t[k] / tau)) {
      res.pass = false;
      res.s = just_below(t[jmin]);
      res.t = t[k];
      res.count = k - jmin + 1;
      res.bound = n0 + (res.t - res.s) / tau;
      return res;
    }
  }
  return res;
}

AdtCheck verify_reverse_adt(const ImpulseSequence& gamma, double n0, double tau, double horizon) {
  if (!(tau > 0.0)) {
    throw PreconditionError("verify_reverse_adt needs tau > 0");
  }
  const auto t = instants_upto(gamma, horizon);
  // Extended points e_0 = 0, e_1..e_K = instants, e_{K+1} = horizon. A window
  // strictly inside (e_j, e_k) holds k−j−1 instants and has length up to
  // e_k − e_j, so with d_i = i − e_i/τ a violation is d_k − d_j < 1 − n₀.
  std::vector<double> e;
  e.reserve(t.size() + 2);
  e.push_back(0.0);
  e.insert(e.end(), t.begin(), t.end());
  e.push_back(horizon);
  AdtCheck res;
  double dmax = -std::numeric_limits<double>::infinity();
  std::size_t jmax = 0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double dk = static_cast<double>(k) - e[k] / tau;
    if (k > 0 && dk - dmax < 1.0 - n0 - slack(e[k] / tau)) {
      res.pass = false;
      res.s = e[jmax];
      res.t = k + 1 == e.size() ? horizon : just_below(e[k]);
      res.count = k - jmax - 1;
      res.bound = (res.t - res.s) / tau - n0;
      return res;
    }
    if (dk > dmax) {
      dmax = dk;
      jmax = k;
    }
  }
  return res;
}

FrequencyReport estimate_frequency(const ImpulseSequence& gamma, double T, double horizon) {
  if (!(T > 0.0) || T > horizon) {
    throw PreconditionError("estimate_frequency needs 0 < T <= horizon");
  }
  const auto t = instants_upto(gamma, horizon);
  // c(s) = n(s, s+T] is right-continuous and piecewise constant with jumps at
  // s = τ_k (leaves) and s = τ_k − T (enters), so every value it takes on
  // [0, horizon − T] is attained at one of those anchors or at 0.
  const double s_max = horizon - T;
  std::vector<double> anchors{0.0};
  for (double tk : t) {
    if (tk <= s_max) anchors.push_back(tk);
    if (tk - T >= 0.0 && tk - T <= s_max) anchors.push_back(tk - T);
  }
  std::sort(anchors.begin(), anchors.end());
  FrequencyReport rep;
  rep.T = T;
  rep.horizon = horizon;
  long cmax = -1;
  long cmin = std::numeric_limits<long>::max();
  for (double s : anchors) {
    const auto lo = std::upper_bound(t.begin(), t.end(), s);
    const auto hi = std::upper_bound(t.begin(), t.end(), s + T);
    const long c = hi - lo;
    if (c > cmax) {
      cmax = c;
      rep.argmax_s = s;
    }
    if (c < cmin) {
      cmin = c;
      rep.argmin_s = s;
    }
  }
  rep.rho_sup = static_cast<double>(cmax) / T;
  rep.rho_inf = static_cast<double>(cmin) / T;
  return rep;
}

std::string frequency_csv(const std::vector<FrequencyReport>& reports) {
  io::CsvTable csv({"T", "rho_sup", "rho_inf", "argmax_s", "argmin_s"});
  for (const auto& r : reports) {
    csv.add_row(std::vector<double>{r.T, r.rho_sup, r.rho_inf, r.argmax_s, r.argmin_s});
  }
  return csv.text();
}

WindowCheck check_window_frequency(const ImpulseSequence& gamma, double rate, double T_min,
                                   FrequencyMode mode, double horizon) {
  if (!(T_min > 0.0)) {
    throw PreconditionError("check_window_frequency needs T_min > 0");
  }
  const auto t = instants_upto(gamma, horizon);
  WindowCheck res;
  if (T_min > horizon) {
    return res;
  }
  const std::size_t K = t.size();
  if (mode == FrequencyMode::Upper) {
    // Instants j..k fit in a window of length max(T_min, τ_k − τ_j + 0⁺); a
    // violation exists iff k−j+1 > rate·max(T_min, τ_k − τ_j) for some j ≤ k.
    std::size_t p = 0;  // instants with τ_j ≤ τ_k − T_min
    double emin = std::numeric_limits<double>::infinity();
    std::size_t jmin = 0;
    for (std::size_t k = 0; k < K; ++k) {
      while (p <= k && t[p] <= t[k] - T_min) {
        const double ep = static_cast<double>(p) - rate * t[p];
        if (ep < emin) {
          emin = ep;
          jmin = p;
        }
        ++p;
      }
      const double ek = static_cast<double>(k) - rate * t[k];
      const double tol = slack(rate * t[k]);
      if (p > 0 && ek - emin + 1.0 > tol) {
        res.pass = false;
        res.s = just_below(t[jmin]);
        res.t = t[k];
        res.count = gamma.count(res.s, res.t);
        return res;
      }
      const double c = static_cast<double>(k - p + 1);
      if (c > rate * T_min + tol) {
        res.pass = false;
        res.s = std::max(0.0, t[k] - T_min);
        res.t = res.s + T_min;
        res.count = gamma.count(res.s, res.t);
        return res;
      }
    }
    return res;
  }

  // Lower mode over extended points e_0 = 0, e_{K+1} = horizon: the emptiest
  // windows sit strictly between e_j and e_k with k−j−1 instants, so a
  // violation is k − rate·e_k < j + 1 − rate·e_j with e_k − e_j long enough.
  std::vector<double> e;
  e.reserve(K + 2);
  e.push_back(0.0);
  e.insert(e.end(), t.begin(), t.end());
  e.push_back(horizon);
  std::size_t p = 0;
  double fmax = -std::numeric_limits<double>::infinity();
  std::size_t jmax = 0;
  for (std::size_t k = 1; k < e.size(); ++k) {
    const bool end = k + 1 == e.size();
    while (p < k && (end ? e[p] <= e[k] - T_min : e[p] < e[k] - T_min)) {
      const double fp = static_cast<double>(p) + 1.0 - rate * e[p];
      if (fp > fmax) {
        fmax = fp;
        jmax = p;
      }
      ++p;
    }
    if (p == 0) {
      continue;
    }
    const double gk = static_cast<double>(k) - rate * e[k];
    if (gk < fmax - slack(rate * e[k])) {
      res.pass = false;
      res.s = e[jmax];
      res.t = end ? horizon : just_below(e[k]);
      res.count = gamma.count(res.s, res.t);
      return res;
    }
  }
  return res;
}

std::optional<double> find_T_for_epsilon(const ImpulseSequence& gamma, double rho, double eps,
                                         double horizon, FrequencyMode mode,
                                         const FindTOptions& opts) {
  if (!(eps > 0.0)) {
    throw PreconditionError("find_T_for_epsilon needs eps > 0");
  }
  const double rate = mode == FrequencyMode::Upper ? rho + eps : rho - eps;
  const auto passes = [&](double T) {
    return check_window_frequency(gamma, rate, T, mode, horizon).pass;
  };
  const double T_cap = 0.5 * horizon;
  double fail = 0.0;
  double T = opts.T_start;
  bool found = false;
  bool first = true;
  while (T <= T_cap) {
    if (passes(T)) {
      found = true;
      break;
    }
    first = false;
    fail = T;
    T *= opts.factor;
  }
  if (!found) {
    return std::nullopt;
  }
  if (first) {
    return T;
  }
  double pass = T;
  while (pass - fail > opts.rel_tol * pass) {
    const double mid = 0.5 * (pass + fail);
    if (passes(mid)) {
      pass = mid;
    } else {
      fail = mid;
    }
  }
  return pass;
}

AdtParams derive_adt_params(double rho, double T, double eps) {
  if (!(eps > 0.0) || !(rho >= 0.0) || !(T > 0.0)) {
    throw PreconditionError("derive_adt_params needs rho >= 0, T > 0, eps > 0");
  }
  AdtParams p;
  p.tau = 1.0 / (rho + eps);
  p.n0 = static_cast<std::size_t>(std::max(1.0, std::ceil(T / p.tau - 1e-9)));
  return p;
}

}  // namespace iiss
