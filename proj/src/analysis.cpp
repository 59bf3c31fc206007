#include "iiss/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "iiss/errors.hpp"
#include "iiss/io.hpp"
#include "iiss/parallel.hpp"

namespace iiss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

MeasuredRun measure(const Trajectory& tr, const ImpulsiveSystem& sys) {
  MeasuredRun r;
  r.label = tr.gamma.label();
  r.t0 = tr.t0;
  r.h0 = sys.h0(tr.t0, tr.samples.front().x);
  r.complete = !tr.truncated;
  r.t.reserve(tr.samples.size());
  r.h.reserve(tr.samples.size());
  r.jumps.reserve(tr.samples.size());
  for (const auto& s : tr.samples) {
    r.t.push_back(s.t);
    r.h.push_back(sys.h(s.t, s.x));
    r.jumps.push_back(static_cast<std::size_t>(s.segment));
  }
  return r;
}

MeasuredRun measure(const ComparisonTrajectory& z, double dt) {
  MeasuredRun r;
  r.label = z.gamma().label();
  r.t0 = z.t0();
  r.h0 = z.z0();
  for (const auto& s : z.sample(dt)) {
    r.t.push_back(s.t);
    r.h.push_back(s.z);
    r.jumps.push_back(s.jumps);
  }
  return r;
}

std::string to_string(AbscissaMode m) { return m == AbscissaMode::Weak ? "weak" : "strong"; }

DecayTest sign_test(const std::vector<double>& series, double alpha) {
  DecayTest d;
  double prev = NAN;
  for (double v : series) {
    if (std::isnan(v)) continue;
    if (!std::isnan(prev)) {
      if (v < prev) ++d.decreases;
      if (v > prev) ++d.increases;
    }
    prev = v;
  }
  const std::size_t n = d.decreases + d.increases;
  if (n == 0) {
    return d;
  }
  // P(X ≥ decreases) for X ~ Bin(n, 1/2), summed in log space.
  double p = 0.0;
  const double ln2n = static_cast<double>(n) * std::log(2.0);
  for (std::size_t k = d.decreases; k <= n; ++k) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    p += std::exp(lc - ln2n);
  }
  d.p_value = std::min(1.0, p);
  d.decaying = d.p_value < alpha;
  return d;
}

namespace {

double abscissa(const MeasuredRun& r, std::size_t i, AbscissaMode mode) {
  const double e = r.t[i] - r.t0;
  return mode == AbscissaMode::Weak ? e : e + static_cast<double>(r.jumps[i]);
}

std::size_t bucket_of(const std::vector<double>& edges, double h0) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), h0) -
                                  edges.begin());
}

}  // namespace

std::vector<double> EnvelopeEstimate::overall() const {
  std::vector<double> out(bin_edges.empty() ? 0 : bin_edges.size() - 1, NAN);
  for (const auto& row : sup) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!std::isnan(row[j])) out[j] = std::isnan(out[j]) ? row[j] : std::max(out[j], row[j]);
    }
  }
  return out;
}

EnvelopeEstimate build_envelope(const std::vector<MeasuredRun>& runs, const EnvelopeOptions& opts) {
  if (runs.empty()) {
    throw PreconditionError("build_envelope needs a nonempty ensemble");
  }
  if (opts.bins == 0) {
    throw PreconditionError("build_envelope needs at least one bin");
  }
  EnvelopeEstimate env;
  env.mode = opts.mode;
  env.h0_edges = opts.h0_edges;
  if (env.h0_edges.empty()) {
    double top = 0.0;
    for (const auto& r : runs) top = std::max(top, r.h0);
    env.h0_edges.push_back(top);
  }
  std::sort(env.h0_edges.begin(), env.h0_edges.end());

  double amax = opts.max_abscissa;
  if (amax <= 0.0) {
    for (const auto& r : runs) {
      for (std::size_t i = 0; i < r.t.size(); ++i) amax = std::max(amax, abscissa(r, i, opts.mode));
    }
  }
  if (amax <= 0.0) amax = 1.0;
  const double width = amax / static_cast<double>(opts.bins);
  env.bin_edges.resize(opts.bins + 1);
  for (std::size_t j = 0; j <= opts.bins; ++j) env.bin_edges[j] = width * static_cast<double>(j);
  env.sup.assign(env.h0_edges.size(), std::vector<double>(opts.bins, NAN));

  for (const auto& r : runs) {
    const std::size_t b = bucket_of(env.h0_edges, r.h0);
    if (b >= env.h0_edges.size()) continue;
    const double offset = opts.gain ? (*opts.gain)(r.input_norm) : 0.0;
    auto& row = env.sup[b];
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      const double a = abscissa(r, i, opts.mode);
      if (a > amax) continue;
      const auto j = std::min(static_cast<std::size_t>(a / width), opts.bins - 1);
      const double v = std::max(r.h[i] - offset, 0.0);
      row[j] = std::isnan(row[j]) ? v : std::max(row[j], v);
    }
  }
  env.decay = sign_test(env.overall());
  return env;
}

KLFunction EnvelopeEstimate::as_kl() const {
  // Suffix maxima per bucket, then prefix maxima across buckets.
  std::vector<std::vector<double>> table = sup;
  for (auto& row : table) {
    double run = 0.0;
    for (std::size_t j = row.size(); j-- > 0;) {
      if (!std::isnan(row[j])) run = std::max(run, row[j]);
      row[j] = run;
    }
  }
  for (std::size_t b = 1; b < table.size(); ++b) {
    for (std::size_t j = 0; j < table[b].size(); ++j) {
      table[b][j] = std::max(table[b][j], table[b - 1][j]);
    }
  }
  const auto edges = h0_edges;
  const double width = bin_edges.size() > 1 ? bin_edges[1] : 1.0;
  return KLFunction("empirical-envelope", [table, edges, width](double r, double s) {
    const std::size_t b = bucket_of(edges, r);
    if (b >= edges.size()) return kInf;
    const auto& row = table[b];
    const auto j = std::min(static_cast<std::size_t>(std::max(s, 0.0) / width), row.size() - 1);
    return row[j];
  });
}

std::string EnvelopeEstimate::csv() const {
  io::CsvTable t({"h0_edge", "abscissa_lo", "abscissa_hi", "sup"});
  for (std::size_t b = 0; b < sup.size(); ++b) {
    for (std::size_t j = 0; j < sup[b].size(); ++j) {
      t.add_row(std::vector<double>{h0_edges[b], bin_edges[j], bin_edges[j + 1], sup[b][j]});
    }
  }
  return t.text();
}

BoundReport guas_check(const std::vector<MeasuredRun>& runs, const RunBound& bound,
                       const BoundTolerance& tol) {
  BoundReport rep;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      double b = kInf;
      try {
        b = bound(r.h0, r.t[i] - r.t0, static_cast<double>(r.jumps[i]));
      } catch (const DomainError&) {
        b = kInf;
      }
      ++rep.checked;
      if (!std::isfinite(b)) {
        ++rep.vacuous;
        continue;
      }
      const double margin = b - r.h[i];
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_run = k;
        rep.worst_t = r.t[i];
      }
      if (margin < -(tol.atol + tol.rtol * std::abs(b))) rep.pass = false;
    }
  }
  return rep;
}

BoundReport guas_check(const std::vector<MeasuredRun>& runs, const KLFunction& beta,
                       AbscissaMode mode, const BoundTolerance& tol) {
  return guas_check(
      runs,
      [&beta, mode](double r, double e, double n) {
        return beta(r, mode == AbscissaMode::Weak ? e : e + n);
      },
      tol);
}

BoundReport check_gus(const std::vector<MeasuredRun>& runs, const RateFunction& alpha,
                      const BoundTolerance& tol) {
  return guas_check(runs, [&alpha](double r, double, double) { return alpha(r); }, tol);
}

std::string AttractivityTable::csv() const {
  io::CsvTable t({"eps", "R", "T", "runs"});
  for (const auto& e : entries) {
    t.add_row(std::vector<std::string>{io::format_double(e.eps), io::format_double(e.R),
                                       e.T ? io::format_double(*e.T) : "not-attained",
                                       std::to_string(e.runs)});
  }
  return t.text();
}

AttractivityTable estimate_attractivity(const std::vector<MeasuredRun>& runs,
                                        const std::vector<double>& eps,
                                        const std::vector<double>& R, double resolution) {
  if (!(resolution > 0.0)) {
    throw PreconditionError("attractivity resolution must be positive");
  }
  AttractivityTable table;
  for (double Rv : R) {
    for (double e : eps) {
      AttractivityEntry entry{e, Rv, 0.0, 0};
      for (const auto& r : runs) {
        if (r.h0 > Rv * (1.0 + 1e-12)) continue;
        ++entry.runs;
        if (!r.complete || r.t.empty()) {
          entry.T.reset();
          break;
        }
        std::size_t last = r.h.size();
        for (std::size_t i = r.h.size(); i-- > 0;) {
          if (r.h[i] > e) {
            last = i;
            break;
          }
        }
        if (last == r.h.size()) continue;
        const double T = (std::floor((r.t[last] - r.t0) / resolution) + 1.0) * resolution;
        if (last + 1 == r.h.size() || T > r.t.back() - r.t0 + 1e-12) {
          entry.T.reset();
          break;
        }
        entry.T = std::max(*entry.T, T);
      }
      if (entry.runs == 0) entry.T.reset();
      table.entries.push_back(entry);
    }
  }
  return table;
}

double GainCurve::operator()(double a) const {
  if (amplitude.empty()) return 0.0;
  if (a <= amplitude.front()) return regressed.front();
  if (a >= amplitude.back()) return regressed.back();
  const auto it = std::upper_bound(amplitude.begin(), amplitude.end(), a);
  const std::size_t j = static_cast<std::size_t>(it - amplitude.begin());
  const double w = (a - amplitude[j - 1]) / (amplitude[j] - amplitude[j - 1]);
  if (!std::isfinite(regressed[j])) return kInf;
  return (1.0 - w) * regressed[j - 1] + w * regressed[j];
}

std::string GainCurve::csv() const {
  io::CsvTable t({"amplitude", "raw", "regressed"});
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    t.add_row(std::vector<double>{amplitude[i], raw[i], regressed[i]});
  }
  return t.text();
}

std::vector<double> pava_nondecreasing(const std::vector<double>& y) {
  struct Block {
    double sum;
    std::size_t n;
    [[nodiscard]] double mean() const { return sum / static_cast<double>(n); }
  };
  std::vector<Block> blocks;
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block b = blocks.back();
      blocks.pop_back();
      blocks.back().sum += b.sum;
      blocks.back().n += b.n;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.n, b.mean());
  return out;
}

GainCurve iss_gain(const ImpulsiveSystem& sys, const GainSpec& spec,
                   const std::vector<double>& amplitudes) {
  if (sys.m == 0) {
    throw PreconditionError("iss_gain needs a system with inputs");
  }
  if (!std::is_sorted(amplitudes.begin(), amplitudes.end())) {
    throw PreconditionError("amplitudes must be sorted ascending");
  }
  GainCurve curve;
  curve.amplitude = amplitudes;
  const double late = spec.horizon - spec.late_fraction * (spec.horizon - spec.t0);
  bool diverged = false;
  for (double a : amplitudes) {
    if (diverged) {
      curve.raw.push_back(kInf);
      continue;
    }
    const Vec uval = Vec::Constant(sys.m, a / std::sqrt(static_cast<double>(sys.m)));
    std::vector<RunSpec> runs;
    for (const auto& g : spec.sequences) {
      for (const auto& x0 : spec.x0s) {
        runs.push_back({g, spec.t0, x0, InputSignal::constant(uval), 0, g.label()});
      }
    }
    const auto results = ensemble(sys, runs, spec.horizon, spec.tol, spec.threads);
    double rho = 0.0;
    for (const auto& r : results) {
      if (!r.trajectory || r.trajectory->truncated) {
        diverged = true;
        break;
      }
      for (const auto& s : r.trajectory->samples) {
        if (s.t >= late) rho = std::max(rho, sys.h(s.t, s.x));
      }
    }
    curve.raw.push_back(diverged ? kInf : rho);
  }
  std::size_t finite = 0;
  while (finite < curve.raw.size() && std::isfinite(curve.raw[finite])) ++finite;
  curve.regressed = pava_nondecreasing({curve.raw.begin(), curve.raw.begin() + static_cast<std::ptrdiff_t>(finite)});
  curve.regressed.resize(curve.raw.size(), kInf);
  return curve;
}

}  // namespace iiss
