#pragma once

#include <optional>
#include <string>

#include "rfc/rational_tf.hpp"

namespace rfc {

/// Actual, nominal (DOb) and identified (RTOb) inertia / torque-coefficient
/// pairs of a single-axis servo.
struct ServoParams {
  double J_m = 0.1;       // kg m^2
  double K_tau = 0.5;     // N m / A
  double J_mn = 0.1;
  double K_tau_n = 0.5;
  double J_mi = 0.1;
  double K_tau_i = 0.5;

  void validate() const;
  static ServoParams matched(double J_m, double K_tau) { return {J_m, K_tau, J_m, K_tau, J_m, K_tau}; }
};

/// alpha = J_mn K_tau / (J_m K_tau_n), beta = J_mn K_tau_i / (J_mi K_tau_n),
/// delta = alpha / beta = J_mi K_tau / (J_m K_tau_i).
struct DerivedRatios {
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 1.0;

  static DerivedRatios from_alpha_beta(double alpha, double beta);
  static DerivedRatios from_alpha_delta(double alpha, double delta);
  void validate() const;
};

DerivedRatios derived_ratios(const ServoParams& servo);

/// Physical parameter set realizing the given ratios: J_m and all torque
/// coefficients are kept, J_mn and J_mi are solved for.
ServoParams realize_ratios(const ServoParams& base, const DerivedRatios& ratios);

struct ObserverGains {
  double g_dob = 500.0;   // rad/s
  double g_rtob = 500.0;  // rad/s
  double Ts = 1e-3;       // s

  bool operator==(const ObserverGains&) const = default;

  void validate() const;
};

enum class ExponentConvention { XiOmega0, XiOmegaN };

const char* to_string(ExponentConvention c);
ExponentConvention exponent_convention_from_string(const std::string& s);

/// Spring-damper environment K_env q + D_env dq acting on the inertia m_bind.
/// Only the underdamped case (xi < 1) and the free-space limit
/// K_env = D_env = 0 are representable.
class EnvModel {
 public:
  EnvModel(double K_env, double D_env, double m_bind,
           ExponentConvention convention = ExponentConvention::XiOmega0);

  static EnvModel free_space(double m_bind) { return EnvModel(0.0, 0.0, m_bind); }

  double K_env() const { return K_env_; }
  double D_env() const { return D_env_; }
  double m_bind() const { return m_bind_; }
  ExponentConvention convention() const { return convention_; }
  bool is_free_space() const { return K_env_ == 0.0; }

  double omega0() const { return omega0_; }
  double xi() const { return xi_; }
  double omega_n() const { return omega_n_; }

  EnvModel with_convention(ExponentConvention c) const { return EnvModel(K_env_, D_env_, m_bind_, c); }

 private:
  double K_env_;
  double D_env_;
  double m_bind_;
  ExponentConvention convention_;
  double omega0_ = 0.0;
  double xi_ = 0.0;
  double omega_n_ = 0.0;
};

struct ForceLoopConfig {
  double C_tau = 0.6;
  ServoParams servo;
  ObserverGains gains;
  EnvModel env{1000.0, 10.0, 0.1};
  std::optional<DerivedRatios> ratio_override;

  DerivedRatios ratios() const;
  /// Servo parameters actually used by every builder: the configured servo,
  /// or its realization of ratio_override.
  ServoParams effective_servo() const;
  void validate() const;
};

RationalTF inner_sensitivity(double alpha, const ObserverGains& gains);
RationalTF inner_complementary(double alpha, const ObserverGains& gains);
/// alpha g_dob Ts / (z - 1).
RationalTF inner_open_loop(double alpha, const ObserverGains& gains);
/// Desired-to-actual acceleration: alpha ((1 + g Ts) z - 1) / (z - (1 - alpha g Ts)).
RationalTF inner_accel_tracking(double alpha, const ObserverGains& gains);

/// Backward-Euler observer low-pass g Ts z / ((1 + g Ts) z - 1).
RationalTF backward_euler_lowpass(double bandwidth, double Ts);
RationalTF rtob_filter(const ObserverGains& gains);

/// Contact-torque estimate as a two-input map:
///   tau_c_hat = contact * tau_c + mismatch * (tau_di - tau_d).
struct RtobEstimationTF {
  RationalTF contact;
  RationalTF mismatch;
};
RtobEstimationTF rtob_estimation_error_tf(const ObserverGains& gains);

struct PhiPolys {
  Poly numerator;
  Poly denominator;
};

/// Third-order plant/environment factor of the force loop.
PhiPolys phi_polys(const EnvModel& env, const DerivedRatios& ratios, const ObserverGains& gains);

/// Scalar gain multiplying the force loop at C_tau = 1: J_mi g_rtob beta
/// (identified inertia of the effective servo).
double force_loop_prefactor(const ForceLoopConfig& cfg);

/// Force-error to estimated-contact-torque open loop L_RTOb(z). Contains an
/// exact pole at z = 1.
RationalTF force_open_loop(const ForceLoopConfig& cfg);

}  // namespace rfc
