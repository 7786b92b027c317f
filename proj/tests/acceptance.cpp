// Acceptance report: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "rfc/analysis.hpp"
#include "rfc/observer_models.hpp"
#include "rfc/oracle.hpp"
#include "rfc/run_config.hpp"
#include "rfc/simulator.hpp"

using namespace rfc;

namespace {

const std::string kConfigs = std::string(RFC_SOURCE_DIR) + "/configs/";

struct Outcome {
  bool ok = false;
  std::string detail;
};

// Smallest total distance between two root sets under any pairing.
double match_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double best = INFINITY;
  std::vector<std::size_t> perm(b.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome pole_law() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const ObserverGains g{50.0 + 1950.0 * u(rng), 500.0, 1e-4 + 1.9e-3 * u(rng)};
    const double alpha = (0.05 + 2.9 * u(rng)) / (g.g_dob * g.Ts);
    const auto poles = inner_sensitivity(alpha, g).poles();
    if (poles.size() != 1) return {false, "S is not first order"};
    worst = std::max(worst, std::abs(poles[0] - Complex(1.0 - alpha * g.g_dob * g.Ts, 0.0)));
  }
  const ObserverGains g{1000.0, 500.0, 1e-3};
  auto pole_at = [&](double p) { return inner_sensitivity(p, g).poles()[0].real(); };
  auto cls = [&](double p) { return classify_stability(inner_sensitivity(p, g)).stability; };
  const bool sign_flip = pole_at(1.0 - 1e-6) > 0.0 && pole_at(1.0) == 0.0 && pole_at(1.0 + 1e-6) < 0.0;
  const bool classes = cls(2.0 - 1e-6) == StabilityClass::AsymptoticallyStable &&
                       cls(2.0) == StabilityClass::MarginallyStable &&
                       cls(2.0 + 1e-6) == StabilityClass::Unstable;
  return {worst <= 1e-12 && sign_flip && classes,
          "max|pole-(1-agT)|=" + fmt("%.3g", worst) + " sign_flip_at_1=" + (sign_flip ? "yes" : "no") +
              " classes_at_2=" + (classes ? "stable/marginal/unstable" : "wrong")};
}

Outcome complementarity() {
  const auto grid = FrequencyGrid::uniform_midpoint(1024);
  double worst = 0.0;
  int n = 0;
  for (double prod : {0.05, 0.3, 0.7, 1.0, 1.3, 1.9, 2.0, 2.5, 0.01, 1.5}) {
    const ObserverGains g{200.0 + 100.0 * n++, 500.0, 5e-4};
    const double alpha = prod / (g.g_dob * g.Ts);
    const RationalTF S = inner_sensitivity(alpha, g);
    const RationalTF T = inner_complementary(alpha, g);
    for (double w : grid.points()) {
      const Complex z = std::polar(1.0, w);
      worst = std::max(worst, std::abs(S.evaluate(z) + T.evaluate(z) - 1.0));
    }
  }
  return {worst <= 1e-12, "max|S+T-1|=" + fmt("%.3g", worst) + " points=1024 configs=10"};
}

Outcome bode() {
  const ObserverGains g{1000.0, 500.0, 1e-3};
  double worst = 0.0;
  for (double prod : {0.1, 0.5, 1.0, 1.5, 1.9}) {
    const BodeIntegral b = bode_integral(inner_sensitivity(prod, g), std::size_t{1} << 20);
    worst = std::max(worst, std::abs(b.value));
  }
  // Unstable S pole at p = -1.5; the exact integral of ln|S| is -2 pi ln|p|.
  const BodeIntegral u = bode_integral(inner_sensitivity(2.5, g), std::size_t{1} << 20);
  const double expected = -2.0 * std::numbers::pi * std::log(1.5);
  const double err = std::abs(u.value - expected);
  return {worst < 1e-3 && err < 1e-3 && u.flagged,
          "max|integral|_stable=" + fmt("%.3g", worst) + " unstable=" + fmt("%.9f", u.value) +
              " expected=" + fmt("%.9f", expected) + " n=2^20"};
}

Outcome waterbed() {
  const ObserverGains g{1000.0, 500.0, 1e-3};
  double prev = 0.0;
  bool increasing = true;
  double worst = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double prod = 2.0 * i / 21.0;
    const double peak = sensitivity_peak(inner_sensitivity(prod, g));
    const double p = 1.0 - prod;
    worst = std::max(worst, std::abs(peak - 2.0 / (1.0 + p)));
    if (peak <= prev) increasing = false;
    prev = peak;
  }
  return {increasing && worst <= 1e-9,
          std::string("strictly_increasing=") + (increasing ? "yes" : "no") + " max|peak-2/(1+p)|=" + fmt("%.3g", worst)};
}

Outcome free_space() {
  double worst = 0.0;
  const EnvModel env = EnvModel::free_space(0.1);
  for (double alpha : {0.5, 1.0, 1.7}) {
    for (double delta : {0.3, 1.0, 2.0}) {
      const ObserverGains g{800.0, 400.0, 1e-3};
      const PhiPolys phi = phi_polys(env, DerivedRatios::from_alpha_delta(alpha, delta), g);
      const double pd = 1.0 - alpha * g.g_dob * g.Ts;
      worst = std::max(worst, match_distance(poly_roots(phi.numerator), {1.0, 1.0, delta}));
      worst = std::max(worst, match_distance(poly_roots(phi.denominator), {0.0, 1.0, pd}));
    }
  }
  return {worst <= 1e-8, "max root error=" + fmt("%.3g", worst)};
}

Outcome loop_concordance() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    ForceLoopConfig cfg;
    cfg.gains = {100.0 + 1400.0 * u(rng), 100.0 + 1400.0 * u(rng), 1e-3};
    const double alpha = (0.2 + 1.6 * u(rng)) / (cfg.gains.g_dob * cfg.gains.Ts);
    const double delta = 0.3 + 1.7 * u(rng);
    cfg.ratio_override = DerivedRatios::from_alpha_delta(alpha, delta);
    const double K = 100.0 + 4900.0 * u(rng);
    const double xi = 0.02 + 0.78 * u(rng);
    cfg.env = EnvModel(K, 2.0 * xi * std::sqrt(K * cfg.servo.J_m), cfg.servo.J_m);
    cfg.C_tau = 0.05 + 0.95 * u(rng);
    const double ra = classify_stability(tf_feedback(force_open_loop(cfg))).spectral_radius;
    const double rb = classify_stability(tf_feedback(oracle::compose_loop_numeric(cfg))).spectral_radius;
    worst = std::max(worst, std::abs(ra - rb));
  }
  return {worst <= 1e-6, "max|rho_closed - rho_composed|=" + fmt("%.3g", worst) + " configs=20"};
}

Outcome nmp_penalty() {
  auto cstar = [](double delta) {
    ForceLoopConfig cfg;
    cfg.env = EnvModel::free_space(cfg.servo.J_m);
    cfg.ratio_override = DerivedRatios::from_alpha_delta(0.8, delta);
    return critical_gain(unit_gain_loop(cfg)).value;
  };
  const double mp = cstar(0.5);
  const double nmp = cstar(2.0);
  return {nmp < mp, "critical_gain(delta=2.0)=" + fmt("%.6g", nmp) + " critical_gain(delta=0.5)=" + fmt("%.6g", mp)};
}

Outcome fig5() {
  auto cstar = [](const char* file) {
    return critical_gain(unit_gain_loop(load_run_config(kConfigs + file).force_loop())).value;
  };
  const double a = cstar("fig5a.toml");
  const double b = cstar("fig5b.toml");
  return {b > a, "critical_gain(a)=" + fmt("%.6g", a) + " critical_gain(b)=" + fmt("%.6g", b)};
}

Outcome simulator_oracle() {
  SimScenario scn;
  scn.duration = 2.0;
  scn.tau_ref = Signal::constant(1.0);
  const SimTrace tr = run_simulation(scn);
  const LinearOracleResponse lin = linear_response_oracle(scn, 2000);
  if (tr.samples.size() < 2000) return {false, "trace too short"};
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < 2000; ++k) {
    diff = std::max(diff, std::abs(tr.samples[k].tau_c - lin.tau_c[k]));
    diff = std::max(diff, std::abs(tr.samples[k].tau_c_hat - lin.tau_c_hat[k]));
    scale = std::max({scale, std::abs(lin.tau_c[k]), std::abs(lin.tau_c_hat[k])});
  }
  const double rel = diff / scale;
  SimScenario longer = scn;
  longer.duration = 5.0;
  const double sse = std::abs(compute_metrics(run_simulation(longer), 1.0).steady_state_error);
  return {rel <= 1e-4 && sse < 1e-6 && !tr.diverged,
          "max relative deviation=" + fmt("%.3g", rel) + " samples=2000 steady_state_error=" + fmt("%.3g", sse)};
}

Outcome fig6() {
  std::string detail;
  std::vector<double> overshoot;
  bool concordant = true;
  bool diverged_seen = false;
  bool order_ok = true;
  for (const char* f : {"fig6_alpha_1.toml", "fig6_alpha_2.toml", "fig6_alpha_3.toml", "fig6_alpha_5.toml"}) {
    const RunConfig rc = load_run_config(kConfigs + f);
    const SimScenario scn = rc.scenario();
    const ResponseMetrics m = compute_metrics(run_simulation(scn), scn.tau_ref.final_value());
    const bool stable = classify_stability(tf_feedback(force_open_loop(scn.cfg))).stable();
    concordant = concordant && (stable == !m.diverged);
    if (diverged_seen && !m.diverged) order_ok = false;
    if (m.diverged) {
      diverged_seen = true;
      detail += fmt("alpha=%g:diverged ", scn.cfg.ratios().alpha);
    } else {
      if (!overshoot.empty() && m.overshoot_pct <= overshoot.back()) order_ok = false;
      overshoot.push_back(m.overshoot_pct);
      detail += fmt("alpha=%g:", scn.cfg.ratios().alpha) + fmt("%.2f%% ", m.overshoot_pct);
    }
  }
  detail += std::string("concordant=") + (concordant ? "yes" : "no");
  return {order_ok && diverged_seen && concordant, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double limit_s;
  };
  const std::vector<Criterion> criteria = {
      {"inner-loop pole law", pole_law, 1.0},
      {"S + T = 1", complementarity, 1.0},
      {"discrete Bode integral", bode, 10.0},
      {"waterbed monotonicity", waterbed, 1.0},
      {"free-space factorization", free_space, 1.0},
      {"loop-derivation concordance", loop_concordance, 5.0},
      {"non-minimum-phase gain penalty", nmp_penalty, 5.0},
      {"critical gain ordering (fig5a vs fig5b)", fig5, 5.0},
      {"simulator vs analytic step response", simulator_oracle, 10.0},
      {"overshoot trend and divergence in alpha", fig6, 30.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < criteria[i].limit_s;
    const bool pass = o.ok && in_time;
    if (!pass) ++failures;
    std::printf("%s %2zu %s: %s time=%.3fs (limit %.0fs)%s\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), secs, criteria[i].limit_s, in_time ? "" : " TIMEOUT");
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
