#include "iiss/ratefns.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "iiss/errors.hpp"

namespace iiss {

std::string to_string(RateClass c) {
  switch (c) {
    case RateClass::Cstar:
      return "Cstar";
    case RateClass::P:
      return "P";
    case RateClass::K:
      return "K";
    case RateClass::Kinf:
      return "Kinf";
    case RateClass::Generic:
      return "generic";
  }
  return "generic";
}

RateClass rate_class_from_string(const std::string& s) {
  if (s == "Cstar" || s == "C*") return RateClass::Cstar;
  if (s == "P") return RateClass::P;
  if (s == "K") return RateClass::K;
  if (s == "Kinf" || s == "K_inf" || s == "Kinfty") return RateClass::Kinf;
  if (s == "generic") return RateClass::Generic;
  throw ConfigError("unknown rate class '" + s + "'");
}

RateFunction::RateFunction() : RateFunction(identity()) {}

RateFunction::RateFunction(std::string name, Fn f, RateClass tag)
    : name_(std::move(name)), f_(std::move(f)), tag_(tag) {}

RateFunction RateFunction::identity() {
  RateFunction id("id", [](double s) { return s; }, RateClass::Kinf);
  id.inverse_ = [](double y) { return y; };
  id.recip_antideriv_ = [](double s) { return std::log(s); };
  id.recip_antideriv_inverse_ = [](double y) { return std::exp(y); };
  id.identity_ = true;
  return id;
}

RateFunction RateFunction::linear(double slope) {
  if (!(slope > 0.0)) {
    throw PreconditionError("linear rate needs a positive slope");
  }
  std::ostringstream name;
  name << slope << "*s";
  RateFunction f(name.str(), [slope](double s) { return slope * s; }, RateClass::Kinf);
  f.inverse_ = [slope](double y) { return y / slope; };
  f.recip_antideriv_ = [slope](double s) { return std::log(s) / slope; };
  f.recip_antideriv_inverse_ = [slope](double y) { return std::exp(slope * y); };
  return f;
}

RateFunction& RateFunction::with_breakpoints(std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  breaks_ = std::move(breaks);
  return *this;
}

RateFunction& RateFunction::with_domain_max(double s_max) {
  domain_max_ = s_max;
  return *this;
}

RateFunction& RateFunction::with_inverse(Fn inverse) {
  inverse_ = std::move(inverse);
  return *this;
}

RateFunction& RateFunction::with_reciprocal_antiderivative(Fn G, Fn G_inverse) {
  recip_antideriv_ = std::move(G);
  recip_antideriv_inverse_ = std::move(G_inverse);
  return *this;
}

RateFunction& RateFunction::with_name(std::string name) {
  name_ = std::move(name);
  return *this;
}

RateFunction& RateFunction::with_tag(RateClass tag) {
  tag_ = tag;
  return *this;
}

double RateFunction::operator()(double s) const {
  if (!(s >= 0.0) || s > domain_max_) {
    std::ostringstream msg;
    msg << "rate '" << name_ << "' evaluated at s = " << s << " outside [0, " << domain_max_
        << "]";
    throw DomainError(msg.str());
  }
  return f_(s);
}

std::vector<double> SampleGrid::points() const {
  if (!logarithmic) {
    return num::linear_grid(lo, hi, count);
  }
  std::vector<double> pts;
  if (lo <= 0.0) {
    pts.push_back(0.0);
  }
  const auto g = num::log_grid(std::max(lo, 1e-9), hi, count);
  pts.insert(pts.end(), g.begin(), g.end());
  return pts;
}

namespace {

double checked_eval(const RateFunction& f, double s) {
  double v = 0.0;
  try {
    v = f(s);
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "evaluation of '" << f.name() << "' failed at s = " << s << ": " << e.what();
    throw Error(msg.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "'" << f.name() << "' is not finite at s = " << s;
    throw Error(msg.str());
  }
  return v;
}

}  // namespace

ClassReport verify_class(const RateFunction& f, RateClass tag, const SampleGrid& grid) {
  ClassReport report;
  report.tag = tag;
  const auto pts = grid.points();
  std::vector<double> vals;
  vals.reserve(pts.size());
  for (double s : pts) {
    vals.push_back(checked_eval(f, s));
  }
  report.points_checked = pts.size();
  if (tag == RateClass::Generic || tag == RateClass::Cstar) {
    return report;
  }

  const bool needs_zero = true;  // P, K and Kinf all vanish at the origin
  if (needs_zero) {
    const double f0 = checked_eval(f, 0.0);
    if (f0 != 0.0) {
      report.violations.push_back({"f(0) = 0", 0.0, f0});
    }
    // Continuity at the origin: the values must shrink toward f(0) = 0.
    const double near = checked_eval(f, 1e-12);
    const double mid = checked_eval(f, 1e-6);
    if (std::abs(near) > 1e-3 || std::abs(near) > std::abs(mid) + 1e-15) {
      report.violations.push_back({"continuous at 0", 1e-12, near});
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] > 0.0 && !(vals[i] > 0.0)) {
      report.violations.push_back({"f(s) > 0 for s > 0", pts[i], vals[i]});
      break;
    }
  }
  if (tag == RateClass::K || tag == RateClass::Kinf) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i] > pts[i - 1] && !(vals[i] > vals[i - 1])) {
        report.violations.push_back({"strictly increasing", pts[i], vals[i] - vals[i - 1]});
        break;
      }
    }
  }
  if (tag == RateClass::Kinf && pts.size() >= 2) {
    // Unboundedness can only be falsified heuristically: the top half of the
    // grid must still add a non-negligible relative increment.
    const double top = vals.back();
    const double half = checked_eval(f, 0.5 * pts.back());
    if (!(top > 0.0) || (top - half) / top < 1e-3) {
      report.violations.push_back({"unbounded (growth at top of grid)", pts.back(), top - half});
    }
  }
  return report;
}

double invert(const RateFunction& f, double y, const InvertTolerance& tol) {
  if (f.has_inverse()) {
    return f.closed_inverse()(y);
  }
  const double f0 = f(0.0);
  if (y < f0) {
    throw RangeError("inversion target below f(0)", f0, f0);
  }
  if (y == f0) {
    return 0.0;
  }
  double lo = 0.0;
  double hi = std::min(std::max(1.0, std::abs(y)), f.domain_max());
  double fhi = f(hi);
  while (fhi < y) {
    if (hi >= f.domain_max() || !std::isfinite(hi)) {
      throw RangeError("inversion target above the range of '" + f.name() + "'", f0, fhi);
    }
    lo = hi;
    hi = std::min(2.0 * hi, f.domain_max());
    fhi = f(hi);
    if (hi > 1e300) {
      throw RangeError("inversion target above the range of '" + f.name() + "'", f0, fhi);
    }
  }
  for (int step = 0; step < tol.max_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      break;
    }
    const double fm = f(mid);
    if (fm < y) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(fm - y) <= 0.25 * (tol.atol + tol.rtol * std::abs(y)) && hi - lo <= 1e-15 * hi) {
      break;
    }
  }
  const double x = 0.5 * (lo + hi);
  return x;
}

RateFunction iterate(const RateFunction& f, std::size_t k) {
  if (k == 0) {
    return RateFunction::identity();
  }
  if (k == 1) {
    return f;
  }
  std::ostringstream name;
  name << f.name() << "^" << k;
  RateFunction out(
      name.str(),
      [f, k](double s) {
        double v = s;
        for (std::size_t i = 0; i < k; ++i) {
          v = f(v);
          if (!std::isfinite(v)) {
            throw DomainError("iterate of '" + f.name() + "' overflowed after " +
                              std::to_string(i + 1) + " steps");
          }
        }
        return v;
      },
      f.tag());
  out.with_domain_max(f.domain_max());
  return out;
}

RateFunction compose(const RateFunction& outer, const RateFunction& inner) {
  RateFunction out(outer.name() + "(" + inner.name() + ")",
                   [outer, inner](double s) { return outer(inner(s)); }, RateClass::Generic);
  out.with_domain_max(inner.domain_max());
  return out;
}

RateFunction max_with_identity(const RateFunction& f) {
  RateFunction out("max(" + f.name() + ",id)", [f](double s) { return std::max(f(s), s); },
                   f.tag() == RateClass::K || f.tag() == RateClass::Kinf ? RateClass::Kinf
                                                                          : RateClass::Generic);
  auto br = f.breakpoints();
  out.with_breakpoints(std::move(br)).with_domain_max(f.domain_max());
  return out;
}

RateFunction majorize_nondecreasing(const RateFunction& f, const MajorizeGrid& grid) {
  const double hi = std::min(grid.hi, f.domain_max());
  std::vector<double> nodes{0.0};
  for (double s : num::log_grid(grid.lo, hi, grid.count)) {
    nodes.push_back(s);
  }
  for (double b : f.breakpoints()) {
    if (b > 0.0 && b < hi) {
      nodes.push_back(b);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  std::vector<double> xs;
  std::vector<double> ys;
  auto refine = [&](auto&& self, double a, double fa, double b, double fb, int depth) -> void {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (depth < grid.refine_depth &&
        std::abs(fm - 0.5 * (fa + fb)) > grid.refine_tol * (1.0 + std::abs(fm))) {
      self(self, a, fa, m, fm, depth + 1);
      self(self, m, fm, b, fb, depth + 1);
      return;
    }
    xs.push_back(m);
    ys.push_back(fm);
    xs.push_back(b);
    ys.push_back(fb);
  };
  xs.push_back(nodes.front());
  ys.push_back(f(nodes.front()));
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    refine(refine, nodes[i], ys.back(), nodes[i + 1], f(nodes[i + 1]), 0);
  }
  for (std::size_t i = 1; i < ys.size(); ++i) {
    ys[i] = std::max(ys[i], ys[i - 1]);
  }
  auto sx = std::make_shared<const std::vector<double>>(std::move(xs));
  auto sy = std::make_shared<const std::vector<double>>(std::move(ys));
  RateFunction out(
      "runmax(" + f.name() + ")",
      [f, sx, sy](double s) {
        const auto& x = *sx;
        const auto& y = *sy;
        if (s >= x.back()) {
          return std::max(y.back(), f(s));
        }
        const auto it = std::upper_bound(x.begin(), x.end(), s);
        const std::size_t j = static_cast<std::size_t>(it - x.begin());
        const double x0 = x[j - 1];
        const double x1 = x[j];
        const double w = (s - x0) / (x1 - x0);
        // Interpolation alone undercuts f inside cells where f is concave.
        return std::max(y[j - 1] + w * (y[j] - y[j - 1]), f(s));
      },
      RateClass::Generic);
  out.with_breakpoints(*sx).with_domain_max(f.domain_max());
  return out;
}

num::QuadResult reciprocal_integral(const RateFunction& f, double lo, double hi, double rtol) {
  if (lo == hi) {
    return {};
  }
  if (!(lo > 0.0) || !(hi > 0.0)) {
    throw QuadratureError("reciprocal integral of '" + f.name() + "' needs positive limits");
  }
  if (f.has_reciprocal_antiderivative()) {
    const auto& G = f.reciprocal_antiderivative();
    return {G(hi) - G(lo), 0.0, 2};
  }
  std::vector<double> log_breaks;
  for (double b : f.breakpoints()) {
    if (b > 0.0) {
      log_breaks.push_back(std::log(b));
    }
  }
  const auto integrand = [&f](double u) {
    const double s = std::exp(u);
    const double v = f(s);
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << "integrand 1/" << f.name() << " singular or negative at s = " << s;
      throw QuadratureError(msg.str());
    }
    return s / v;
  };
  return num::integrate_split(integrand, std::log(lo), std::log(hi), log_breaks, rtol, 1e-15);
}

KLReport verify_kl(const KLFunction& beta, const std::vector<double>& r_grid,
                   const std::vector<double>& t_grid, double tol) {
  KLReport rep;
  for (double t : t_grid) {
    const double b0 = beta(0.0, t);
    if (std::abs(b0) > tol) {
      rep.violations.push_back({"beta(0,t) = 0", t, b0});
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (double r : r_grid) {
      const double v = beta(r, t);
      if (v < prev - tol * (1.0 + std::abs(prev))) {
        rep.violations.push_back({"nondecreasing in r", r, v - prev});
      }
      prev = v;
    }
  }
  for (double r : r_grid) {
    double prev = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
      const double v = beta(r, t);
      if (v > prev + tol * (1.0 + std::abs(prev))) {
        rep.violations.push_back({"nonincreasing in t", t, v - prev});
      }
      prev = v;
    }
  }
  return rep;
}

}  // namespace iiss
