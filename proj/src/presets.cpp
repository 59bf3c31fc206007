#include "iiss/presets.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "iiss/errors.hpp"
#include "iiss/numerics.hpp"

namespace iiss {

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

namespace {

const double kSqrt2 = std::sqrt(2.0);

double eta51_inv(double y) { return y <= 0.5 ? 2.0 * kSqrt2 * y : 2.0 * std::sqrt(y); }

RateFunction half_square(const char* name) {
  return RateFunction(name, [](double s) { return 0.5 * s * s; }, RateClass::Kinf)
      .with_inverse([](double y) { return std::sqrt(2.0 * y); });
}

Preset make_example51() {
  Preset p;
  p.name = "example-5.1";
  p.provenance = "destabilizing impulses: scalar single-input system, V = x^2/2";
  auto& sys = p.system;
  sys.name = p.name;
  sys.n = 1;
  sys.m = 1;
  sys.f = [](double, const Vec& x, const Vec& u) {
    const double xi = x[0];
    const double mu = u[0];
    const double d = std::abs(xi) <= kSqrt2 ? -xi + kSqrt2 * mu : -0.5 * xi * xi * xi + std::abs(xi) * mu;
    return Vec::Constant(1, d).eval();
  };
  sys.g = [](double, const Vec& x, const Vec& u) {
    const double xi = x[0];
    const double j = std::abs(xi) <= kSqrt2 ? 2.0 * kSqrt2 * xi * xi * u[0] : xi * xi * xi;
    return Vec::Constant(1, j).eval();
  };

  auto& c = p.candidate;
  c.name = "V = x^2/2";
  c.V = [](double, const Vec& x) { return 0.5 * x.squaredNorm(); };
  c.phi1 = half_square("phi1");
  c.phi2 = half_square("phi2");
  c.chi = RateFunction("chi", [](double s) {
            const double r = eta51_inv(s);
            return 0.5 * r * r;
          }, RateClass::Kinf).with_breakpoints({0.5});
  c.pi = RateFunction("pi", [](double s) {
           const double r = eta51_inv(s);
           const double v = r + r * r * r;
           return 0.5 * v * v;
         }, RateClass::Kinf).with_breakpoints({0.5});
  c.phi = RateFunction("phi", [](double s) { return s <= 1.0 ? s : s * s; }, RateClass::P)
              .with_breakpoints({1.0})
              .with_reciprocal_antiderivative(
                  [](double r) { return r <= 1.0 ? std::log(r) : 1.0 - 1.0 / r; },
                  [](double y) {
                    if (y <= 0.0) return std::exp(y);
                    return y < 1.0 ? 1.0 / (1.0 - y) : std::numeric_limits<double>::infinity();
                  });
  c.psi = RateFunction("psi", [](double s) { return s + 4.0 * s * s + 4.0 * s * s * s; },
                       RateClass::Kinf);
  c.p = FlowRate::constant(1.0);
  c.regime = Regime::Decay;
  p.theta = 1.25;
  p.sequence_class = ClassDescriptor::adt(2.0, 1.25);
  p.canonical =
      "example-5.1;n=1;m=1;"
      "f=|x|<=sqrt2:-x+sqrt2*u|else:-x^3/2+|x|*u;"
      "g=|x|<=sqrt2:2*sqrt2*x^2*u|else:x^3;"
      "V=x^2/2;phi1=phi2=s^2/2;eta=s<=sqrt2:s/(2*sqrt2)|else:s^2/4;"
      "chi=(eta^-1)^2/2;pi=(eta^-1+(eta^-1)^3)^2/2;"
      "phi=s<=1:s|else:s^2;psi=s+4s^2+4s^3;p=1;regime=decay;theta=1.25;class=Sad(2,1.25)";
  return p;
}

Preset make_example52() {
  Preset p;
  p.name = "example-5.2";
  p.provenance = "stabilizing impulses: scalar time-varying system without inputs, V = |x|";
  auto& sys = p.system;
  sys.name = p.name;
  sys.n = 1;
  sys.m = 0;
  sys.f = [](double t, const Vec& x, const Vec&) {
    return Vec::Constant(1, std::tanh(t) * std::tanh(x[0])).eval();
  };
  sys.g = [](double, const Vec& x, const Vec&) {
    const double xi = x[0];
    const double j = std::abs(xi) <= 1.0 ? -xi + 0.5 * xi * xi * xi : -xi + 0.5 * std::cbrt(xi);
    return Vec::Constant(1, j).eval();
  };

  auto& c = p.candidate;
  c.name = "V = |x|";
  c.V = [](double, const Vec& x) { return x.norm(); };
  c.phi1 = RateFunction::identity();
  c.phi2 = RateFunction::identity();
  c.chi = RateFunction::identity();
  c.pi = RateFunction::identity();
  c.phi = RateFunction("tanh", [](double s) { return std::tanh(s); }, RateClass::P)
              .with_reciprocal_antiderivative([](double r) { return num::log_sinh(r); },
                                              [](double y) { return num::log_sinh_inverse(y); });
  c.psi = RateFunction("psi", [](double s) {
            return s <= 1.0 ? 0.5 * s * s * s : 0.5 * std::cbrt(s);
          }, RateClass::Kinf).with_breakpoints({1.0});
  c.p = FlowRate::tanh_rate();
  c.regime = Regime::Growth;
  p.theta = 0.8;
  p.sequence_class = ClassDescriptor::fixed_dwell(0.7, 0.8);
  p.canonical =
      "example-5.2;n=1;m=0;f=tanh(t)*tanh(x);"
      "g=|x|<=1:-x+x^3/2|else:-x+x^(1/3)/2;"
      "V=|x|;phi1=phi2=chi=pi=id;phi=-tanh;psi=s<=1:s^3/2|else:s^(1/3)/2;p=tanh;"
      "regime=growth;theta=0.8;class=Sf(0.7,0.8)";
  return p;
}

const std::map<std::string, Preset>& registry() {
  static const std::map<std::string, Preset> presets = [] {
    std::map<std::string, Preset> m;
    for (Preset p : {make_example51(), make_example52()}) {
      p.hash = hex64(fnv1a64(p.canonical));
      m.emplace(p.name, std::move(p));
    }
    return m;
  }();
  return presets;
}

}  // namespace

const Preset& get_preset(const std::string& name) {
  const auto& r = registry();
  const auto it = r.find(name);
  if (it == r.end()) {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return it->second;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

}  // namespace iiss
