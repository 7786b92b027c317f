#include "rfc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "rfc/errors.hpp"

namespace rfc {

using std::numbers::pi;

FrequencyGrid::FrequencyGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw InvalidInput("frequency grid is empty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double w = points_[i];
    if (!(w > -pi && w <= pi)) throw InvalidInput("frequency grid point outside (-pi, pi]");
    if (i > 0 && !(w > points_[i - 1])) throw InvalidInput("frequency grid is not strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::uniform_midpoint(std::size_t n) {
  if (n == 0) throw InvalidInput("frequency grid is empty");
  std::vector<double> pts(n);
  const double h = 2.0 * pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = -pi + (static_cast<double>(i) + 0.5) * h;
  return FrequencyGrid(std::move(pts));
}

FrequencyGrid FrequencyGrid::uniform_endpoint(std::size_t n) {
  if (n == 0) throw InvalidInput("frequency grid is empty");
  std::vector<double> pts(n);
  const double h = 2.0 * pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = -pi + static_cast<double>(i + 1) * h;
  pts.back() = pi;
  return FrequencyGrid(std::move(pts));
}

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || hi > pi) throw InvalidInput("log-spaced grid needs 0 < lo <= hi <= pi");
  auto pts = rfc::log_spaced(lo, hi, n);
  pts.back() = std::min(pts.back(), pi);
  return FrequencyGrid(std::move(pts));
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

FrequencyResponse frequency_response(const RationalTF& tf, const FrequencyGrid& grid) {
  FrequencyResponse fr;
  fr.omega_ts = grid.points();
  fr.magnitude_db.reserve(grid.size());
  fr.phase_deg.reserve(grid.size());
  double previous = std::numeric_limits<double>::quiet_NaN();
  double offset = 0.0;
  for (double w : grid.points()) {
    try {
      const Complex h = tf.evaluate(std::polar(1.0, w));
      fr.magnitude_db.push_back(20.0 * std::log10(std::abs(h)));
      double ph = std::arg(h);
      if (std::isfinite(previous)) {
        const double raw = ph + offset;
        if (raw - previous > pi) offset -= 2.0 * pi;
        if (raw - previous < -pi) offset += 2.0 * pi;
      }
      ph += offset;
      previous = ph;
      fr.phase_deg.push_back(ph * 180.0 / pi);
    } catch (const PoleEvaluation&) {
      fr.magnitude_db.push_back(std::numeric_limits<double>::infinity());
      fr.phase_deg.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return fr;
}

BodeIntegral bode_integral(const RationalTF& S, std::size_t n_points) {
  if (n_points < (std::size_t{1} << 14) || (n_points & (n_points - 1)) != 0) {
    throw InvalidInput("bode_integral: n_points must be a power of two >= 2^14");
  }
  if (!S.is_proper()) throw ImproperSystem("bode_integral: S must be proper");
  BodeIntegral out;
  out.n_points = n_points;
  const StabilityReport rep = classify_stability(S);
  if (!rep.stable()) {
    out.flagged = true;
    std::ostringstream os;
    os << "S has a pole at radius " << rep.spectral_radius
       << " (not inside the unit circle); the integral no longer equals zero";
    out.note = os.str();
  }
  const double h = 2.0 * pi / static_cast<double>(n_points);
  // Real coefficients make ln|S(e^{jw})| even in w; the midpoints are
  // symmetric, so the positive half is summed and doubled.
  double acc = 0.0;
  const std::size_t half = n_points / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double w = (static_cast<double>(i) + 0.5) * h;
    acc += std::log(std::abs(S.evaluate(std::polar(1.0, w))));
  }
  out.value = 2.0 * acc * h;
  return out;
}

double sensitivity_peak(const RationalTF& S) {
  const StabilityReport rep = classify_stability(S);
  if (!rep.stable()) throw UnsupportedModel("sensitivity_peak requires an asymptotically stable S");
  auto mag = [&S](double w) { return std::abs(S.evaluate(std::polar(1.0, w))); };

  constexpr std::size_t kGrid = 4097;
  const double h = pi / static_cast<double>(kGrid - 1);
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double v = mag(static_cast<double>(i) * h);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = best == 0 ? 0.0 : static_cast<double>(best - 1) * h;
  double b = best + 1 >= kGrid ? pi : static_cast<double>(best + 1) * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = mag(c);
  double fd = mag(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = mag(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = mag(d);
    }
  }
  return std::max({best_val, mag(0.5 * (a + b)), mag(a), mag(b)});
}

namespace {

Poly closed_loop_characteristic(const RationalTF& loop, double k) { return loop.den() + loop.num().scaled(k); }

double closed_loop_radius(const RationalTF& loop, double k) {
  return spectral_radius(poly_roots(closed_loop_characteristic(loop, k)));
}

}  // namespace

LocusBranch root_locus(const RationalTF& loop, const std::vector<double>& gains) {
  if (gains.empty()) throw InvalidInput("root_locus: empty gain grid");
  if (!std::is_sorted(gains.begin(), gains.end())) throw InvalidInput("root_locus: gains must be ascending");
  LocusBranch out;
  out.gains = gains;
  for (double k : gains) {
    std::vector<Complex> roots = poly_roots(closed_loop_characteristic(loop, k));
    out.spectral_radius.push_back(spectral_radius(roots));
    if (!out.branch_points.empty()) {
      const auto& prev = out.branch_points.back();
      if (roots.size() != prev.size()) {
        throw NumericalError("root_locus: closed-loop degree changes along the gain grid");
      }
      // Greedy assignment by ascending displacement.
      struct Cand {
        double d;
        std::size_t from;
        std::size_t to;
      };
      std::vector<Cand> cands;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        for (std::size_t j = 0; j < roots.size(); ++j) cands.push_back({std::abs(prev[i] - roots[j]), i, j});
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.d < b.d; });
      std::vector<Complex> ordered(roots.size());
      std::vector<bool> used_from(prev.size(), false);
      std::vector<bool> used_to(roots.size(), false);
      for (const Cand& c : cands) {
        if (used_from[c.from] || used_to[c.to]) continue;
        used_from[c.from] = used_to[c.to] = true;
        ordered[c.from] = roots[c.to];
      }
      roots = std::move(ordered);
    }
    out.branch_points.push_back(std::move(roots));
  }
  return out;
}

const char* to_string(CriticalGainStatus s) {
  switch (s) {
    case CriticalGainStatus::Crossing:
      return "crossing";
    case CriticalGainStatus::StableThroughout:
      return "stable-throughout";
    case CriticalGainStatus::UnstableAtLowGain:
      return "unstable-at-low-gain";
  }
  return "unknown";
}

CriticalGain critical_gain(const RationalTF& loop, const CriticalGainOptions& opts) {
  if (!(opts.lo > 0.0) || !(opts.hi > opts.lo) || opts.scan_points < 2) {
    throw InvalidInput("critical_gain: need 0 < lo < hi and at least two scan points");
  }
  auto unstable = [&loop](double k) { return closed_loop_radius(loop, k) > 1.0; };
  const auto scan = log_spaced(opts.lo, opts.hi, opts.scan_points);
  if (unstable(scan.front())) return {0.0, CriticalGainStatus::UnstableAtLowGain};
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (!unstable(scan[i])) continue;
    double a = scan[i - 1];
    double b = scan[i];
    while ((b - a) > opts.rel_tol * 1e-2 * b) {
      const double m = std::sqrt(a * b);
      (unstable(m) ? b : a) = m;
    }
    return {0.5 * (a + b), CriticalGainStatus::Crossing};
  }
  return {};
}

double max_zero_magnitude(const EnvModel& env, double delta, const ObserverGains& gains) {
  // Phi_n does not depend on alpha.
  DerivedRatios r{1.0, 1.0, delta};
  return spectral_radius(poly_roots(phi_polys(env, r, gains).numerator));
}

double min_phase_boundary(const EnvModel& env, const ObserverGains& gains, double lo, double hi) {
  if (!(hi > lo) || lo < 0.0) throw InvalidInput("min_phase_boundary: need 0 <= lo < hi");
  constexpr double eps = kDefaultStabilityBand;
  auto excess = [&](double d) { return max_zero_magnitude(env, d, gains) - 1.0; };
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (!(f_lo <= eps && f_hi > eps)) {
    std::ostringstream os;
    os << "no minimum-phase boundary in [" << lo << ", " << hi << "]: max zero magnitude " << f_lo + 1.0
       << " at lo, " << f_hi + 1.0 << " at hi";
    throw NoCrossing(os.str(), f_lo + 1.0, f_hi + 1.0);
  }
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double m = 0.5 * (a + b);
    (excess(m) > eps ? b : a) = m;
  }
  return b;
}

RationalTF unit_gain_loop(const ForceLoopConfig& cfg) {
  ForceLoopConfig unit = cfg;
  unit.C_tau = 1.0;
  return cancel(force_open_loop(unit));
}

namespace {

SweepRecord evaluate_tuple(const SweepGrid& grid, double alpha, double delta, double g_dob, double g_rtob, double Ts,
                           double K_env, double D_env) {
  SweepRecord rec;
  rec.alpha = alpha;
  rec.delta = delta;
  rec.g_dob = g_dob;
  rec.g_rtob = g_rtob;
  rec.Ts = Ts;
  rec.K_env = K_env;
  rec.D_env = D_env;
  std::vector<std::string> problems;
  try {
    const DerivedRatios ratios = DerivedRatios::from_alpha_delta(alpha, delta);
    rec.beta = ratios.beta;
    ForceLoopConfig cfg;
    cfg.C_tau = 1.0;
    cfg.servo = grid.base_servo;
    cfg.gains = ObserverGains{g_dob, g_rtob, Ts};
    cfg.env = EnvModel(K_env, D_env, grid.m_bind.value_or(grid.base_servo.J_m), grid.convention);
    cfg.ratio_override = ratios;

    const RationalTF S = inner_sensitivity(alpha, cfg.gains);
    try {
      rec.sensitivity_peak = sensitivity_peak(S);
    } catch (const std::exception& e) {
      problems.emplace_back(e.what());
    }
    const BodeIntegral bi = bode_integral(S, grid.bode_points);
    rec.bode_integral = bi.value;
    if (bi.flagged) problems.push_back("bode integral flagged: unstable inner loop");

    rec.max_zero_magnitude = max_zero_magnitude(cfg.env, delta, cfg.gains);
    rec.nmp_flag = rec.max_zero_magnitude > 1.0 + grid.eps;

    const CriticalGain cg = critical_gain(unit_gain_loop(cfg));
    rec.critical_gain = cg.value;
    if (cg.status == CriticalGainStatus::UnstableAtLowGain) problems.push_back("unstable at low gain");
  } catch (const std::exception& e) {
    problems.emplace_back(e.what());
  }
  if (!problems.empty()) {
    rec.status.clear();
    for (std::size_t i = 0; i < problems.size(); ++i) rec.status += (i ? "; " : "") + problems[i];
  }
  return rec;
}

}  // namespace

std::vector<SweepRecord> design_sweep(const SweepGrid& grid) {
  struct Tuple {
    double a, d, gd, gr, ts, k, c;
  };
  std::vector<Tuple> tuples;
  for (double a : grid.alpha)
    for (double d : grid.delta)
      for (double gd : grid.g_dob)
        for (double gr : grid.g_rtob)
          for (double ts : grid.Ts)
            for (double k : grid.K_env)
              for (double c : grid.D_env) tuples.push_back({a, d, gd, gr, ts, k, c});

  std::vector<SweepRecord> out(tuples.size());
  unsigned workers = grid.threads ? grid.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, tuples.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (std::size_t i = next++; i < tuples.size(); i = next++) {
      const Tuple& t = tuples[i];
      out[i] = evaluate_tuple(grid, t.a, t.d, t.gd, t.gr, t.ts, t.k, t.c);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace rfc
