#include "iiss/comparison.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "iiss/errors.hpp"
#include "iiss/io.hpp"

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTiny = -690.0;  // ln 1e-300
constexpr double kLogHuge = 690.0;

std::string fmt(double x) { return io::format_double(x); }

}  // namespace

ComparisonSpec ComparisonSpec::from_candidate(const LyapunovCandidate& cand) {
  return {cand.p, cand.phi, cand.psi, cand.regime};
}

FlowTransform::FlowTransform(RateFunction rate) : rate_(std::move(rate)) {
  if (rate_.has_reciprocal_antiderivative()) {
    G1_ = rate_.reciprocal_antiderivative()(1.0);
  }
  // Endpoint probes: F(1e-300) ≈ F(1e-150) means the integral converges at 0.
  const auto endpoint = [this](double near, double far) {
    const double side = near < 1.0 ? -kInf : kInf;
    double fn = 0.0;
    double ff = 0.0;
    try {
      fn = (*this)(near);
      ff = (*this)(far);
    } catch (const Error&) {
      return side;  // integrand overflow on the way out: treat as divergent
    }
    if (!std::isfinite(fn) || !std::isfinite(ff)) return side;
    return std::abs(ff - fn) <= 1e-9 * (1.0 + std::abs(ff)) ? ff : side;
  };
  a_ = endpoint(1e-150, 1e-300);
  b_ = endpoint(1e150, 1e300);
}

double FlowTransform::operator()(double r) const {
  if (r < 0.0) {
    throw DomainError("F is defined for r > 0 only");
  }
  if (r == 0.0) {
    return a_;
  }
  if (rate_.has_reciprocal_antiderivative()) {
    return rate_.reciprocal_antiderivative()(r) - G1_;
  }
  return reciprocal_integral(rate_, 1.0, r, 1e-12).value;
}

double FlowTransform::inverse(double y) const {
  if (y <= a_) return 0.0;
  if (y >= b_) return kInf;
  if (rate_.has_reciprocal_antiderivative() && rate_.reciprocal_antiderivative_inverse()) {
    return rate_.reciprocal_antiderivative_inverse()(y + G1_);
  }
  // Bracket in u = ln r, starting from F(1) = 0.
  double lo = 0.0;
  double hi = 0.0;
  if (y > 0.0) {
    double step = 1.0;
    while ((*this)(std::exp(hi)) < y) {
      lo = hi;
      hi = std::min(hi + step, kLogHuge);
      if (lo == kLogHuge) return kInf;
      step *= 2.0;
    }
  } else if (y < 0.0) {
    double step = 1.0;
    while ((*this)(std::exp(lo)) > y) {
      hi = lo;
      lo = std::max(lo - step, kLogTiny);
      if (hi == kLogTiny) return 0.0;
      step *= 2.0;
    }
  } else {
    return 1.0;
  }
  // Newton on u with bisection fallback; F'(u) = r/φ(r).
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double r = std::exp(u);
    const double g = (*this)(r) - y;
    if (g == 0.0) break;
    if (g > 0.0) hi = u; else lo = u;
    const double slope = r / rate_(r);
    double next = u - g / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::exp(u);
}

namespace {

RateFunction make_psi_bar(const RateFunction& psi, Regime regime) {
  const bool monotone = psi.tag() == RateClass::K || psi.tag() == RateClass::Kinf;
  if (regime == Regime::Decay) {
    auto m = max_with_identity(psi);
    return monotone ? m : majorize_nondecreasing(m);
  }
  return monotone ? psi : majorize_nondecreasing(psi);
}

}  // namespace

ComparisonSystem::ComparisonSystem(ComparisonSpec spec)
    : spec_(std::move(spec)), F_(spec_.phi), psi_bar_(make_psi_bar(spec_.psi, spec_.regime)) {}

double ComparisonSystem::flow(double t0, double w0, double t) const {
  if (!(w0 >= 0.0)) {
    throw PreconditionError("comparison state must be nonnegative");
  }
  if (t < t0) {
    throw PreconditionError("flow evaluated before its initial time");
  }
  if (w0 == 0.0 || t == t0) {
    return w0;
  }
  const double P = spec_.p.integral(t0, t);
  if (spec_.regime == Regime::Decay) {
    const double y = F_(w0) - P;
    if (std::isfinite(F_.lower()) && y <= F_.lower() + 1e-12) {
      return 0.0;
    }
    return F_.inverse(y);
  }
  const double y = F_(w0) + P;
  if (y >= F_.upper()) {
    // Escape time t* solves ∫_{t0}^{t*} p = b − F(w0).
    const double need = F_.upper() - F_(w0);
    double lo = t0;
    double hi = t;
    while (hi - lo > 1e-9 * (1.0 + std::abs(hi))) {
      const double mid = 0.5 * (lo + hi);
      (spec_.p.integral(t0, mid) < need ? lo : hi) = mid;
    }
    throw EscapeError("comparison solution escapes in (" + fmt(lo) + ", " + fmt(hi) + "]", lo, hi);
  }
  return F_.inverse(y);
}

double ComparisonSystem::jump(double z, JumpLaw law) const {
  return law == JumpLaw::Psi ? spec_.psi(z) : psi_bar_(z);
}

double flow_solution(const ComparisonSystem& sys, double t0, double w0, double t) {
  return sys.flow(t0, w0, t);
}

ComparisonTrajectory::ComparisonTrajectory(std::shared_ptr<const ComparisonSystem> sys, double t0,
                                           double z0)
    : sys_(std::move(sys)), t0_(t0), z0_(z0) {}

double ComparisonTrajectory::at(double t) const {
  if (t < t0_ || t > t_end()) {
    throw PreconditionError("comparison trajectory evaluated outside [" + fmt(t0_) + ", " +
                            fmt(t_end()) + "]");
  }
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double v, const Segment& s) { return v < s.start; });
  const Segment& seg = *(it - 1);
  if (t == seg.end && it != segments_.end() && it->start == t) {
    return it->z_start;
  }
  return t == seg.start ? seg.z_start : sys_->flow(seg.start, seg.z_start, t);
}

std::size_t ComparisonTrajectory::jumps_until(double t) const {
  const auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double v, const Segment& s) { return v < s.start; });
  return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

std::vector<ComparisonTrajectory::Sample> ComparisonTrajectory::sample(double dt) const {
  std::vector<Sample> out;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const Segment& s = segments_[k];
    out.push_back({s.start, s.z_start, k > 0, k});
    const double len = s.end - s.start;
    if (len <= 0.0) continue;
    const auto n = static_cast<std::size_t>(std::ceil(len / dt));
    for (std::size_t i = 1; i < n; ++i) {
      const double t = s.start + len * static_cast<double>(i) / static_cast<double>(n);
      out.push_back({t, sys_->flow(s.start, s.z_start, t), false, k});
    }
    out.push_back({s.end, s.z_end, false, k});
  }
  return out;
}

std::string ComparisonTrajectory::csv(double dt) const {
  io::CsvTable table({"t", "z", "is_jump"});
  for (const auto& s : sample(dt)) {
    table.add_row(std::vector<double>{s.t, s.z, s.is_jump ? 1.0 : 0.0});
  }
  return table.text();
}

ComparisonTrajectory solve_comparison(std::shared_ptr<const ComparisonSystem> sys,
                                      const ImpulseSequence& gamma, double t0, double z0,
                                      double horizon, JumpLaw law) {
  if (!(z0 >= 0.0)) {
    throw PreconditionError("comparison initial state must be nonnegative");
  }
  if (!(horizon >= t0)) {
    throw PreconditionError("horizon must not precede t0");
  }
  ComparisonTrajectory tr(sys, t0, z0);
  tr.gamma_ = gamma.truncated(horizon);
  double t = t0;
  double z = z0;
  for (double tau : gamma.between(t0, horizon)) {
    const double before = sys->flow(t, z, tau);
    tr.segments_.push_back({t, z, tau, before});
    z = sys->jump(before, law);
    t = tau;
  }
  tr.segments_.push_back({t, z, horizon, sys->flow(t, z, horizon)});
  return tr;
}

std::vector<double> jump_recursion(const RateFunction& psi_bar, double w0, std::size_t k_max) {
  std::vector<double> w{w0};
  w.reserve(k_max + 1);
  for (std::size_t k = 0; k < k_max; ++k) {
    w.push_back(w.back() == 0.0 ? 0.0 : psi_bar(w.back()));
  }
  return w;
}

namespace {

std::size_t smallest_m0(double T, double theta) {
  auto m0 = static_cast<std::size_t>(std::max(1.0, std::ceil(T / theta)));
  while (m0 > 1 && static_cast<double>(m0 - 1) * theta >= T) --m0;
  return m0;
}

void check_inputs(const EnvelopeInputs& in) {
  if (!(in.theta > 0.0)) throw PreconditionError("envelope needs theta > 0");
  if (!in.T_of_eps) throw PreconditionError("envelope needs a class witness T(eps)");
}

}  // namespace

DecayEnvelope build_envelope_prop1(std::shared_ptr<const ComparisonSystem> sys,
                                   const EnvelopeInputs& in) {
  check_inputs(in);
  DecayEnvelope e;
  e.kind = EnvelopeKind::Prop1;
  e.M = in.M;
  e.N = in.N;
  e.theta = in.theta;
  e.delta = in.N - in.M;
  if (!(in.M > 0.0)) throw PreconditionError("decay envelope needs M > 0, got " + fmt(in.M));
  if (!(e.delta > 0.0)) throw PreconditionError("decay envelope needs N > M, got delta = " + fmt(e.delta));
  e.eps0 = in.eps0.value_or(e.delta / (2.0 * in.theta * in.M));
  e.T_eps0 = in.T_of_eps(e.eps0);
  e.m0 = smallest_m0(e.T_eps0, in.theta);
  e.T0 = static_cast<double>(e.m0) * in.theta;
  e.k0 = static_cast<std::size_t>(std::floor((1.0 / in.theta + e.eps0) * e.T0 * (1.0 + 1e-12)));
  e.system = std::move(sys);
  if (e.system) {
    e.eta = iterate(e.system->psi_bar(), e.k0).with_name("eta");
  }
  return e;
}

DecayEnvelope build_envelope_prop2(std::shared_ptr<const ComparisonSystem> sys,
                                   const EnvelopeInputs& in) {
  check_inputs(in);
  DecayEnvelope e;
  e.kind = EnvelopeKind::Prop2;
  e.M = in.M;
  e.N = in.N;
  e.theta = in.theta;
  e.delta = in.M - in.N;
  if (!(e.delta > 0.0)) throw PreconditionError("growth envelope needs M2 > N2, got delta = " + fmt(e.delta));
  e.eps0 = in.eps0.value_or(e.delta / (2.0 * in.theta * in.M));
  e.T_eps0 = in.T_of_eps(e.eps0);
  e.m0 = smallest_m0(e.T_eps0, in.theta);
  e.T0 = static_cast<double>(e.m0) * in.theta;
  e.k0 = static_cast<std::size_t>(
      std::max(1.0, std::ceil((1.0 / in.theta - e.eps0) * e.T0 * (1.0 - 1e-12))));
  e.system = std::move(sys);
  return e;
}

double DecayEnvelope::nu(double r) const {
  if (r == 0.0) return 0.0;
  const auto& F = system->transform();
  return F.inverse(F(r) + static_cast<double>(m0) * N);
}

double DecayEnvelope::beta1(double r, double s) const {
  if (r == 0.0) return 0.0;
  const auto& F = system->transform();
  return F.inverse(F(r) - 0.5 * static_cast<double>(m0) * delta * s);
}

double DecayEnvelope::beta2(double r, double s) const { return nu(beta1(r, s)); }

double DecayEnvelope::beta3(double r, double s) const {
  const double k = static_cast<double>(k0);
  if (s < k) {
    return (2.0 - s / k) * beta2(r, 0.0);
  }
  return beta2(r, s / k - 1.0);
}

double DecayEnvelope::final_bound(double r, double elapsed, double n) const {
  return beta3(r, 0.5 * n + std::max(kappa() * (elapsed - T0), 0.0));
}

KLFunction DecayEnvelope::beta3_kl() const {
  auto self = *this;
  return KLFunction("beta3", [self](double r, double s) { return self.beta3(r, s); });
}

std::string DecayEnvelope::json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind == EnvelopeKind::Prop1 ? "prop1" : "prop2";
  j["M"] = M;
  j["N"] = N;
  j["theta"] = theta;
  j["delta"] = delta;
  j["eps0"] = eps0;
  j["T_eps0"] = T_eps0;
  j["m0"] = m0;
  j["T0"] = T0;
  j["k0"] = k0;
  j["window_descent"] = window_descent();
  return j.dump(2);
}

DescentReport check_window_descent(const ComparisonTrajectory& z, const DecayEnvelope& env,
                                   double tol) {
  DescentReport rep;
  const auto& F = env.system->transform();
  const double need = env.window_descent();
  for (std::size_t l = 1;; ++l) {
    const double start = z.t0() + static_cast<double>(l - 1) * env.T0;
    const double end = z.t0() + static_cast<double>(l) * env.T0;
    if (end > z.t_end()) break;
    const double zs = z.at(start);
    const double ze = z.at(end);
    if (!(ze > 0.0)) break;
    ++rep.windows;
    const double margin = F(zs) - F(ze) - need;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_start = start;
    }
    if (margin < -tol * std::max(1.0, need)) rep.pass = false;
  }
  return rep;
}

}  // namespace iiss
