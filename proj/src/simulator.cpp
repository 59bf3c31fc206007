#include "iiss/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iiss/errors.hpp"
#include "iiss/io.hpp"
#include "iiss/parallel.hpp"

namespace iiss {

void ImpulsiveSystem::validate() const {
  if (n < 1 || m < 0) {
    throw ValidationError("system '" + name + "': need n >= 1 and m >= 0");
  }
  if (!f || !g) {
    throw ValidationError("system '" + name + "': flow and jump maps are required");
  }
  const Vec x = Vec::Zero(n);
  const Vec u = Vec::Zero(m);
  if (f(0.0, x, u).size() != n) {
    throw ValidationError("system '" + name + "': f returns the wrong dimension");
  }
  if (g(0.0, x, u).size() != n) {
    throw ValidationError("system '" + name + "': g returns the wrong dimension");
  }
}

InputSignal InputSignal::zero(int m) {
  InputSignal s;
  s.dim = m;
  s.eval = [m](double) { return Vec::Zero(m).eval(); };
  s.label = "zero";
  return s;
}

InputSignal InputSignal::constant(const Vec& value) {
  InputSignal s;
  s.dim = static_cast<int>(value.size());
  s.eval = [value](double) { return value; };
  s.label = "constant";
  return s;
}

InputSignal InputSignal::impulse_only(const Vec& value, std::vector<double> instants) {
  std::sort(instants.begin(), instants.end());
  InputSignal s;
  s.dim = static_cast<int>(value.size());
  s.breakpoints = instants;
  s.eval = [value, instants = std::move(instants)](double t) {
    return std::binary_search(instants.begin(), instants.end(), t) ? value
                                                                   : Vec::Zero(value.size()).eval();
  };
  s.label = "impulse-only";
  return s;
}

Tolerances Tolerances::tight() {
  Tolerances t;
  t.atol = 1e-12;
  t.rtol = 1e-11;
  t.h_max = 0.1;
  return t;
}

std::size_t Trajectory::jumps_until(double t) const {
  return static_cast<std::size_t>(
      std::upper_bound(jumps.begin(), jumps.end(), t,
                       [](double v, const JumpRecord& j) { return v < j.t; }) -
      jumps.begin());
}

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(const Vec& v) { return v.allFinite(); }

class Stepper {
 public:
  Stepper(const ImpulsiveSystem& sys, const InputSignal& u, const Tolerances& tol)
      : sys_(sys), u_(u), tol_(tol) {}

  // Integrates the smooth piece [a, b] from x, appending accepted steps to
  // `out`. Returns false if the blow-up guard fired (x, t then hold the last
  // accepted state).
  bool run(double a, double b, Vec& x, double& h, int segment, Trajectory& tr) {
    lo_ = std::nextafter(a, b);
    hi_ = std::nextafter(b, a);
    double t = a;
    while (t < b) {
      if (++tr.steps > tol_.max_steps) {
        throw IntegrationError("step budget exhausted at t = " + io::format_double(t), t);
      }
      h = std::min(h, tol_.h_max);
      bool last = false;
      if (t + h >= b - 1e-14 * std::max(1.0, std::abs(b))) {
        h = b - t;
        last = true;
      }
      Vec x_new;
      const double err = step(t, x, h, x_new);
      if (err <= 1.0) {
        t = last ? b : t + h;
        x = std::move(x_new);
        tr.samples.push_back({t, x, segment, false});
        if (x.norm() > tol_.blowup) {
          return false;
        }
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      } else {
        ++tr.rejected;
        h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        if (h < tol_.h_min) {
          throw IntegrationError("step size underflow at t = " + io::format_double(t), t);
        }
      }
    }
    return true;
  }

 private:
  Vec rhs(double s, const Vec& x) const {
    // Inputs are read strictly inside the piece: values at its endpoints are
    // measure-zero data that belong to the jumps.
    const double si = std::clamp(s, lo_, hi_);
    Vec d = sys_.f(si, x, u_.dim == 0 ? Vec(0) : u_(si));
    if (!finite(d)) {
      throw IntegrationError("non-finite flow value at t = " + io::format_double(s), s);
    }
    return d;
  }

  double step(double t, const Vec& x, double h, Vec& x_new) const {
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + c2 * h, x + h * (a21 * k1));
    const Vec k3 = rhs(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 =
        rhs(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(t + h, x_new);
    const Vec e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double sc = tol_.atol + tol_.rtol * std::max(std::abs(x[i]), std::abs(x_new[i]));
      err = std::max(err, std::abs(e[i]) / sc);
    }
    return std::isfinite(err) ? err : 1e10;
  }

  const ImpulsiveSystem& sys_;
  const InputSignal& u_;
  const Tolerances& tol_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

}  // namespace

Trajectory integrate(const ImpulsiveSystem& sys, const ImpulseSequence& gamma, double t0,
                     const Vec& x0, const InputSignal& u, double horizon, const Tolerances& tol) {
  if (x0.size() != sys.n || !finite(x0)) {
    throw PreconditionError("initial state must be finite with dimension " +
                            std::to_string(sys.n));
  }
  if (u.dim != sys.m) {
    throw PreconditionError("input dimension does not match the system");
  }
  if (!(horizon >= t0)) {
    throw PreconditionError("horizon must not precede t0");
  }
  Trajectory tr;
  tr.t0 = t0;
  tr.t_end = horizon;
  tr.gamma = gamma.truncated(horizon);
  const auto impulses = gamma.between(t0, horizon);

  std::vector<double> stops(impulses);
  for (double b : u.breakpoints) {
    if (b > t0 && b < horizon) stops.push_back(b);
  }
  stops.push_back(horizon);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  Vec x = x0;
  tr.samples.push_back({t0, x, 0, false});
  Stepper stepper(sys, u, tol);
  double h = tol.h_init;
  double t = t0;
  int segment = 0;
  std::size_t next_jump = 0;
  for (double stop : stops) {
    if (stop > t && !stepper.run(t, stop, x, h, segment, tr)) {
      tr.truncated = true;
      tr.t_end = tr.samples.back().t;
      return tr;
    }
    t = stop;
    if (next_jump < impulses.size() && impulses[next_jump] == stop) {
      ++next_jump;
      const Vec inc = sys.g(stop, x, u.dim == 0 ? Vec(0) : u(stop));
      if (!finite(inc)) {
        throw IntegrationError("non-finite jump value at t = " + io::format_double(stop), stop);
      }
      Vec after = x + inc;
      tr.jumps.push_back({stop, x, after, inc});
      x = std::move(after);
      ++segment;
      tr.samples.push_back({stop, x, segment, true});
      if (x.norm() > tol.blowup) {
        tr.truncated = true;
        tr.t_end = stop;
        return tr;
      }
    }
  }
  return tr;
}

double input_norm(const InputSignal& u, const ImpulseSequence& gamma, double s, double t,
                  double samples_per_unit) {
  if (u.dim == 0 || !(t > s)) {
    return 0.0;
  }
  double best = 0.0;
  const auto& bp = u.breakpoints;
  const auto probe = [&](double x) { best = std::max(best, u(x).norm()); };
  const auto n = static_cast<std::size_t>(std::max(2.0, std::ceil((t - s) * samples_per_unit)));
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = i == n ? t : s + (t - s) * static_cast<double>(i) / static_cast<double>(n);
    if (!std::binary_search(bp.begin(), bp.end(), x)) probe(x);
  }
  // One-sided limits at declared discontinuities.
  for (double b : bp) {
    if (b <= s || b > t) continue;
    probe(std::nextafter(b, s));
    if (b < t) probe(std::nextafter(b, t));
  }
  for (double tau : gamma.between(s, t)) {
    best = std::max(best, u(tau).norm());
  }
  return best;
}

std::vector<RunResult> ensemble(const ImpulsiveSystem& sys, const std::vector<RunSpec>& runs,
                                double horizon, const Tolerances& tol, int threads) {
  std::vector<RunResult> out(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    out[i].spec = runs[i];
    try {
      out[i].trajectory =
          integrate(sys, runs[i].gamma, runs[i].t0, runs[i].x0, runs[i].u, horizon, tol);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index));
}

std::string trajectory_csv(const Trajectory& tr) {
  const auto n = tr.samples.empty() ? 0 : tr.samples.front().x.size();
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 0; i < n; ++i) header.push_back("x" + std::to_string(i));
  header.push_back("segment");
  header.push_back("is_jump");
  io::CsvTable table(header);
  for (const auto& s : tr.samples) {
    std::vector<double> row{s.t};
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(s.x[i]);
    row.push_back(s.segment);
    row.push_back(s.is_jump ? 1.0 : 0.0);
    table.add_row(row);
  }
  return table.text();
}

std::string jumps_csv(const Trajectory& tr) {
  const auto n = tr.samples.empty() ? 0 : tr.samples.front().x.size();
  std::vector<std::string> header{"t"};
  for (const char* part : {"before", "after", "increment"}) {
    for (Eigen::Index i = 0; i < n; ++i) header.push_back(std::string(part) + std::to_string(i));
  }
  io::CsvTable table(header);
  for (const auto& j : tr.jumps) {
    std::vector<double> row{j.t};
    for (const Vec* v : {&j.before, &j.after, &j.increment}) {
      for (Eigen::Index i = 0; i < n; ++i) row.push_back((*v)[i]);
    }
    table.add_row(row);
  }
  return table.text();
}

}  // namespace iiss
