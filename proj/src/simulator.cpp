#include "rfc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "rfc/errors.hpp"
#include "rfc/oracle.hpp"
#include "rfc/rational_tf.hpp"

namespace rfc {

double Signal::at(std::size_t k, double t) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Step:
      return t >= t0 ? value : 0.0;
    case Kind::Sampled:
      if (samples.empty()) return 0.0;
      return samples[std::min(k, samples.size() - 1)];
  }
  return 0.0;
}

double Signal::final_value() const {
  if (kind == Kind::Sampled) return samples.empty() ? 0.0 : samples.back();
  return value;
}

const char* to_string(ContactMode m) { return m == ContactMode::Bilateral ? "bilateral" : "unilateral"; }

void SimScenario::validate() const {
  cfg.validate();
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidInput("duration must be positive");
  if (substeps < 1) throw InvalidInput("substeps must be >= 1");
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) throw InvalidInput("noise sigma must be >= 0");
}

ZohUpdate zoh_plant(double J_m, const EnvModel& env, bool engaged, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("zoh_plant: dt must be positive");
  if (!(J_m > 0.0)) throw InvalidInput("zoh_plant: J_m must be positive");
  const double K = engaged ? env.K_env() : 0.0;
  const double D = engaged ? env.D_env() : 0.0;
  oracle::Matrix A(2, 2);
  A << 0.0, 1.0, -K / J_m, -D / J_m;
  oracle::Matrix B(2, 1);
  B << 0.0, 1.0 / J_m;
  const oracle::DiscreteSS d = oracle::zoh_discretize(A, B, dt);
  ZohUpdate out;
  out.A = d.A;
  out.B = d.B.col(0);
  return out;
}

namespace {

// Box-Muller over a 64-bit Mersenne Twister; the second variate of each pair
// is kept for the next call.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    cached_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  bool cached_ = false;
  double spare_ = 0.0;
};

}  // namespace

SimTrace run_simulation(const SimScenario& scn) {
  scn.validate();
  const ServoParams s = scn.cfg.effective_servo();
  const ObserverGains& g = scn.cfg.gains;
  const EnvModel& env = scn.cfg.env;
  const double Ts = g.Ts;
  const double C = scn.cfg.C_tau;

  const double dt = Ts / scn.substeps;
  const ZohUpdate engaged = zoh_plant(s.J_m, env, true, dt);
  const ZohUpdate free = zoh_plant(s.J_m, env, false, dt);

  const double gd = g.g_dob * Ts;
  const double gr = g.g_rtob * Ts;
  const double cd = gd / (1.0 + gd);
  const double cr = gr / (1.0 + gr);
  const double rho = s.K_tau_i / s.K_tau_n;

  const auto n_periods = static_cast<std::size_t>(std::floor(scn.duration / Ts + 1e-9));
  SimTrace trace;
  trace.Ts = Ts;
  trace.samples.reserve(n_periods + 1);

  GaussianSource noise(scn.noise.seed);
  Eigen::Vector2d x(scn.q0, scn.dq0);
  double yd_prev = 0.0;
  double yr_prev = 0.0;

  for (std::size_t k = 0; k <= n_periods; ++k) {
    const double t = static_cast<double>(k) * Ts;
    const double tau_ref = scn.tau_ref.at(k, t);
    const double tau_d = scn.tau_d.at(k, t);
    const double tau_di = scn.tau_di.at(k, t);
    const double v = x(1) + (scn.noise.sigma > 0.0 ? scn.noise.sigma * noise.next() : 0.0);

    // Both observers filter the current of this very period, so the DOb,
    // RTOb and force law form one linear equation in X = K_tau_n I:
    //   y_d = p_d + cd X,  y_r = p_r + cr rho X,
    //   X = J_mn C (tau_ref - (y_r - J_mi g_r v)) + y_d - J_mn g_d v.
    const double p_d = (gd * s.J_mn * g.g_dob * v + yd_prev) / (1.0 + gd);
    const double p_r = (gr * (s.J_mi * g.g_rtob * v - tau_di) + yr_prev) / (1.0 + gr);
    double X = 0.0;
    if (scn.controller_enabled) {
      X = (s.J_mn * C * (tau_ref - p_r + s.J_mi * g.g_rtob * v) + p_d - s.J_mn * g.g_dob * v) /
          (1.0 - cd + s.J_mn * C * cr * rho);
    }
    const double y_d = p_d + cd * X;
    const double y_r = p_r + cr * rho * X;
    const double current = X / s.K_tau_n;

    SimSample smp;
    smp.t = t;
    smp.q = x(0);
    smp.dq = x(1);
    smp.current = current;
    smp.tau_dis_hat = y_d - s.J_mn * g.g_dob * v;
    smp.tau_c_hat = y_r - s.J_mi * g.g_rtob * v;
    smp.ddq_des = scn.controller_enabled ? C * (tau_ref - smp.tau_c_hat) : 0.0;
    smp.tau_ref = tau_ref;
    const bool in_contact = scn.contact == ContactMode::Bilateral || x(0) >= 0.0;
    smp.tau_c = in_contact ? env.K_env() * x(0) + env.D_env() * x(1) : 0.0;
    const double motor_torque = s.K_tau * current - tau_d;
    smp.ddq = (motor_torque - smp.tau_c) / s.J_m;

    const double worst = std::max({std::abs(smp.q), std::abs(smp.dq), std::abs(smp.ddq), std::abs(smp.current),
                                   std::abs(smp.tau_c_hat), std::abs(smp.tau_dis_hat)});
    if (!(worst <= kBlowUpBound)) {
      smp.diverged = true;
      trace.samples.push_back(smp);
      trace.diverged = true;
      break;
    }
    trace.samples.push_back(smp);
    if (k == n_periods) break;

    for (int sub = 0; sub < scn.substeps; ++sub) {
      const bool engaged_now = scn.contact == ContactMode::Bilateral || x(0) >= 0.0;
      const ZohUpdate& zoh = engaged_now ? engaged : free;
      x = zoh.A * x + zoh.B * motor_torque;
    }
    yd_prev = y_d;
    yr_prev = y_r;
  }
  return trace;
}

ResponseMetrics compute_metrics(const SimTrace& trace, double final_ref) {
  if (trace.samples.empty()) throw InvalidInput("compute_metrics: empty trace");
  ResponseMetrics m;
  m.diverged = trace.diverged;
  std::size_t n = trace.samples.size();
  if (trace.diverged && n > 1) --n;  // drop the blown-up sample

  double rms = 0.0;
  double peak = trace.samples[0].tau_c;
  for (std::size_t i = 0; i < n; ++i) {
    const SimSample& s = trace.samples[i];
    const double e = s.tau_c_hat - s.tau_c;
    rms += e * e;
    peak = final_ref >= 0.0 ? std::max(peak, s.tau_c) : std::min(peak, s.tau_c);
  }
  m.rms_estimation_error = std::sqrt(rms / static_cast<double>(n));
  if (final_ref != 0.0) m.overshoot_pct = std::max(0.0, (peak - final_ref) / final_ref * 100.0);

  if (trace.diverged) {
    m.steady_state_error = std::numeric_limits<double>::quiet_NaN();
    m.settling_time.reset();
    return m;
  }
  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double mean = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) mean += trace.samples[i].tau_c;
  mean /= static_cast<double>(tail);
  m.steady_state_error = final_ref - mean;

  const double band = 0.02 * std::abs(final_ref);
  std::optional<std::size_t> last_outside;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(trace.samples[i].tau_c - final_ref) > band) last_outside = i;
  }
  if (!last_outside) {
    m.settling_time = trace.samples[0].t;
  } else if (*last_outside + 1 < n) {
    m.settling_time = trace.samples[*last_outside + 1].t;
  }
  return m;
}

LinearOracleResponse linear_response_oracle(const SimScenario& scn, std::size_t n_samples) {
  scn.validate();
  if (scn.contact != ContactMode::Bilateral || scn.noise.sigma != 0.0 || scn.q0 != 0.0 || scn.dq0 != 0.0) {
    throw InvalidInput("linear_response_oracle: scenario is not ideal (bilateral, noiseless, at rest)");
  }
  const bool step_at_zero = scn.tau_ref.kind == Signal::Kind::Constant ||
                            (scn.tau_ref.kind == Signal::Kind::Step && scn.tau_ref.t0 <= 0.0);
  if (!step_at_zero) throw InvalidInput("linear_response_oracle: reference must be a step at t = 0");
  const double amp = scn.tau_ref.final_value();

  const RationalTF loop = force_open_loop(scn.cfg);
  LinearOracleResponse out;
  out.tau_c_hat = step_response(tf_feedback(loop), n_samples);
  const RationalTF to_accel = tf_scale(tf_sensitivity(loop), scn.cfg.C_tau);
  const RationalTF to_contact = cancel(tf_series(to_accel, oracle::contact_force_path(scn.cfg)));
  out.tau_c = step_response(to_contact, n_samples);
  for (double& v : out.tau_c_hat) v *= amp;
  for (double& v : out.tau_c) v *= amp;
  return out;
}

}  // namespace rfc
