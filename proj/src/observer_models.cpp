#include "rfc/observer_models.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rfc/errors.hpp"

namespace rfc {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << " must be positive and finite (got " << v << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

void ServoParams::validate() const {
  require_positive(J_m, "J_m");
  require_positive(K_tau, "K_tau");
  require_positive(J_mn, "J_mn");
  require_positive(K_tau_n, "K_tau_n");
  require_positive(J_mi, "J_mi");
  require_positive(K_tau_i, "K_tau_i");
}

DerivedRatios DerivedRatios::from_alpha_beta(double alpha, double beta) {
  DerivedRatios r{alpha, beta, alpha / beta};
  r.validate();
  return r;
}

DerivedRatios DerivedRatios::from_alpha_delta(double alpha, double delta) {
  DerivedRatios r{alpha, alpha / delta, delta};
  r.validate();
  return r;
}

void DerivedRatios::validate() const {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(delta, "delta");
  if (std::abs(delta - alpha / beta) > 1e-12 * std::abs(delta)) {
    throw InvalidInput("ratios violate delta = alpha / beta");
  }
}

DerivedRatios derived_ratios(const ServoParams& s) {
  s.validate();
  DerivedRatios r;
  r.alpha = (s.J_mn * s.K_tau) / (s.J_m * s.K_tau_n);
  r.beta = (s.J_mn * s.K_tau_i) / (s.J_mi * s.K_tau_n);
  r.delta = r.alpha / r.beta;
  return r;
}

ServoParams realize_ratios(const ServoParams& base, const DerivedRatios& ratios) {
  base.validate();
  ratios.validate();
  ServoParams s = base;
  s.J_mn = ratios.alpha * base.J_m * base.K_tau_n / base.K_tau;
  s.J_mi = s.J_mn * base.K_tau_i / (ratios.beta * base.K_tau_n);
  return s;
}

void ObserverGains::validate() const {
  require_positive(g_dob, "g_dob");
  require_positive(g_rtob, "g_rtob");
  require_positive(Ts, "Ts");
  require_positive(g_dob * Ts, "g_dob*Ts");
  require_positive(g_rtob * Ts, "g_rtob*Ts");
}

const char* to_string(ExponentConvention c) {
  return c == ExponentConvention::XiOmega0 ? "xi-omega0" : "xi-omega-n";
}

ExponentConvention exponent_convention_from_string(const std::string& s) {
  if (s == "xi-omega0") return ExponentConvention::XiOmega0;
  if (s == "xi-omega-n") return ExponentConvention::XiOmegaN;
  throw InvalidInput("unknown exponent convention '" + s + "' (expected xi-omega0 or xi-omega-n)");
}

EnvModel::EnvModel(double K_env, double D_env, double m_bind, ExponentConvention convention)
    : K_env_(K_env), D_env_(D_env), m_bind_(m_bind), convention_(convention) {
  if (!(K_env >= 0.0) || !std::isfinite(K_env)) throw InvalidInput("K_env must be >= 0 and finite");
  if (!(D_env >= 0.0) || !std::isfinite(D_env)) throw InvalidInput("D_env must be >= 0 and finite");
  require_positive(m_bind, "m_bind");
  if (K_env == 0.0) {
    // omega0 = 0 leaves xi undefined; only the undamped free-space limit is
    // expressible in the cos/sinc form.
    if (D_env > 0.0) throw UnsupportedModel("pure damper environment (K_env = 0, D_env > 0) is overdamped");
    return;
  }
  omega0_ = std::sqrt(K_env / m_bind);
  xi_ = D_env / (2.0 * omega0_ * m_bind);
  if (xi_ >= 1.0) {
    std::ostringstream os;
    os << "environment is not underdamped (xi = " << xi_ << ")";
    throw UnsupportedModel(os.str());
  }
  omega_n_ = omega0_ * std::sqrt(1.0 - xi_ * xi_);
}

DerivedRatios ForceLoopConfig::ratios() const {
  if (ratio_override) {
    ratio_override->validate();
    return *ratio_override;
  }
  return derived_ratios(servo);
}

ServoParams ForceLoopConfig::effective_servo() const {
  if (ratio_override) return realize_ratios(servo, *ratio_override);
  servo.validate();
  return servo;
}

void ForceLoopConfig::validate() const {
  if (!(C_tau >= 0.0) || !std::isfinite(C_tau)) throw InvalidInput("C_tau must be >= 0 and finite");
  servo.validate();
  gains.validate();
  if (ratio_override) ratio_override->validate();
}

RationalTF inner_sensitivity(double alpha, const ObserverGains& g) {
  require_positive(alpha, "alpha");
  g.validate();
  const double p = 1.0 - alpha * g.g_dob * g.Ts;
  return RationalTF(Poly{1.0, -1.0}, Poly{1.0, -p}, g.Ts);
}

RationalTF inner_complementary(double alpha, const ObserverGains& g) {
  require_positive(alpha, "alpha");
  g.validate();
  const double ag = alpha * g.g_dob * g.Ts;
  return RationalTF(Poly{ag}, Poly{1.0, -(1.0 - ag)}, g.Ts);
}

RationalTF inner_open_loop(double alpha, const ObserverGains& g) {
  require_positive(alpha, "alpha");
  g.validate();
  return RationalTF(Poly{alpha * g.g_dob * g.Ts}, Poly{1.0, -1.0}, g.Ts);
}

RationalTF inner_accel_tracking(double alpha, const ObserverGains& g) {
  require_positive(alpha, "alpha");
  g.validate();
  const double gt = g.g_dob * g.Ts;
  return RationalTF(Poly{alpha * (1.0 + gt), -alpha}, Poly{1.0, -(1.0 - alpha * gt)}, g.Ts);
}

RationalTF backward_euler_lowpass(double bandwidth, double Ts) {
  require_positive(bandwidth, "bandwidth");
  require_positive(Ts, "Ts");
  const double gt = bandwidth * Ts;
  return RationalTF(Poly{gt, 0.0}, Poly{1.0 + gt, -1.0}, Ts);
}

RationalTF rtob_filter(const ObserverGains& g) {
  g.validate();
  return backward_euler_lowpass(g.g_rtob, g.Ts);
}

RtobEstimationTF rtob_estimation_error_tf(const ObserverGains& g) {
  RationalTF q = rtob_filter(g);
  return {q, tf_negate(q)};
}

PhiPolys phi_polys(const EnvModel& env, const DerivedRatios& ratios, const ObserverGains& g) {
  // alpha = 0 or delta = 0 are meaningful limits here (observer off, zero
  // identified inertia), so only sign and finiteness are checked.
  if (!(ratios.alpha >= 0.0) || !std::isfinite(ratios.alpha)) throw InvalidInput("alpha must be >= 0");
  if (!(ratios.delta >= 0.0) || !std::isfinite(ratios.delta)) throw InvalidInput("delta must be >= 0");
  require_positive(g.Ts, "Ts");
  double decay = 1.0;  // e^{-xi w Ts}
  double cosine = 1.0;
  double sinc = 1.0;
  if (!env.is_free_space()) {
    const double wn_ts = env.omega_n() * g.Ts;
    if (wn_ts >= std::numbers::pi) {
      std::ostringstream os;
      os << "omega_n * Ts = " << wn_ts << " is not below pi; environment mode is aliased";
      throw UnsupportedModel(os.str());
    }
    const double w = env.convention() == ExponentConvention::XiOmega0 ? env.omega0() : env.omega_n();
    decay = std::exp(-env.xi() * w * g.Ts);
    cosine = std::cos(wn_ts);
    sinc = std::sin(wn_ts) / wn_ts;
  }
  const double es = decay * sinc;
  const double ag = ratios.alpha * g.g_dob * g.Ts;
  const double d = ratios.delta;
  Poly num{1.0, -(2.0 * decay * cosine + d * es), decay * decay + 2.0 * d * es, -d * es};
  Poly den{1.0, -(2.0 * decay * cosine - ag * es), decay * decay - ag * es, 0.0};
  return {std::move(num), std::move(den)};
}

double force_loop_prefactor(const ForceLoopConfig& cfg) {
  const ServoParams s = cfg.effective_servo();
  return s.J_mi * cfg.gains.g_rtob * cfg.ratios().beta;
}

RationalTF force_open_loop(const ForceLoopConfig& cfg) {
  cfg.validate();
  const double Ts = cfg.gains.Ts;
  const double gain = cfg.C_tau * force_loop_prefactor(cfg);
  const RationalTF integrator(Poly{gain * Ts, 0.0}, Poly{1.0, -1.0}, Ts);
  const RationalTF lead_lag(Poly{1.0 + cfg.gains.g_dob * Ts, -1.0}, Poly{1.0 + cfg.gains.g_rtob * Ts, -1.0}, Ts);
  const PhiPolys phi = phi_polys(cfg.env, cfg.ratios(), cfg.gains);
  const RationalTF plant(phi.numerator, phi.denominator, Ts);
  return tf_series(tf_series(integrator, lead_lag), plant);
}

}  // namespace rfc
