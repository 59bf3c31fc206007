#include "iiss/numerics.hpp"

#include <algorithm>
#include <limits>

#include "iiss/errors.hpp"

namespace iiss::num {

namespace {

// Forced subdivision levels; keeps periodic integrands from aliasing the
// first few estimates into early acceptance.
constexpr int kMinDepth = 4;

struct SimpsonState {
  const ScalarFn& f;
  long evals = 0;
  int max_depth;
  double err = 0.0;

  double eval(double x) {
    ++evals;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw QuadratureError("non-finite integrand at x = " + std::to_string(x));
    }
    return y;
  }

  double recurse(double a, double fa, double m, double fm, double b, double fb, double whole,
                 double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if ((depth >= kMinDepth && std::abs(delta) <= 15.0 * tol) || depth >= max_depth || lm == a || rm == b) {
      if (depth >= max_depth && std::abs(delta) > 15.0 * tol * 1e3) {
        throw QuadratureError("adaptive Simpson exhausted its depth near x = " +
                              std::to_string(m));
      }
      err += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
           recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

QuadResult adaptive_simpson(const ScalarFn& f, double a, double b, double rtol, double atol,
                            int max_depth) {
  if (a == b) {
    return {};
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  SimpsonState st{f, 0, max_depth};
  const double m = a + (b - a) * 0.5;
  const double fa = st.eval(a);
  const double fm = st.eval(m);
  const double fb = st.eval(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double coarse = std::abs(whole);
  const double tol = std::max(atol, rtol * coarse);
  const double v = st.recurse(a, fa, m, fm, b, fb, whole, tol, 0);
  return {sign * v, st.err, st.evals};
}

QuadResult integrate_split(const ScalarFn& f, double a, double b, std::span<const double> breaks,
                           double rtol, double atol) {
  if (a == b) {
    return {};
  }
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  std::vector<double> cuts{lo};
  for (double x : breaks) {
    if (x > lo && x < hi) {
      cuts.push_back(x);
    }
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  QuadResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i] == cuts[i + 1]) {
      continue;
    }
    const QuadResult piece = adaptive_simpson(f, cuts[i], cuts[i + 1], rtol, atol);
    total.value += piece.value;
    total.error += piece.error;
    total.evaluations += piece.evaluations;
  }
  if (b < a) {
    total.value = -total.value;
  }
  return total;
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

template <class Better>
Extremum golden(const ScalarFn& f, double lo, double hi, double tol, Better better) {
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol; ++it) {
    if (better(fc, fd)) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  if (better(fc, fd)) {
    return {c, fc};
  }
  return {d, fd};
}

}  // namespace

Extremum golden_max(const ScalarFn& f, double lo, double hi, double tol) {
  return golden(f, lo, hi, tol, [](double x, double y) { return x > y; });
}

Extremum golden_min(const ScalarFn& f, double lo, double hi, double tol) {
  return golden(f, lo, hi, tol, [](double x, double y) { return x < y; });
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double l0 = std::log(lo);
  const double l1 = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  g.back() = hi;
  return g;
}

double log_sinh(double x) {
  if (x <= 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  if (x > 20.0) {
    return x - std::log(2.0) + std::log1p(-std::exp(-2.0 * x));
  }
  if (x < 1e-4) {
    return std::log(x) + x * x / 6.0;
  }
  return std::log(std::sinh(x));
}

double log_sinh_inverse(double y) {
  // sinh(x) = e^y  =>  x = asinh(e^y) = y + log(1 + sqrt(1 + e^{-2y})).
  if (y > 0.0) {
    return y + std::log1p(std::sqrt(1.0 + std::exp(-2.0 * y)));
  }
  return std::asinh(std::exp(y));
}

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace iiss::num
