#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rfc/observer_models.hpp"

namespace rfc {

/// Scalar signal sampled at the controller instants.
struct Signal {
  enum class Kind { Constant, Step, Sampled };
  Kind kind = Kind::Constant;
  double value = 0.0;
  double t0 = 0.0;               // Step: switch time
  std::vector<double> samples;   // Sampled: one value per period, last value held

  static Signal constant(double v) { return {Kind::Constant, v, 0.0, {}}; }
  static Signal step(double v, double t0) { return {Kind::Step, v, t0, {}}; }
  static Signal sampled(std::vector<double> s) { return {Kind::Sampled, 0.0, 0.0, std::move(s)}; }

  double at(std::size_t k, double t) const;
  double final_value() const;
};

enum class ContactMode { Bilateral, Unilateral };

const char* to_string(ContactMode m);

/// Velocity-measurement noise; sigma = 0 means none.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 1;
};

struct SimScenario {
  ForceLoopConfig cfg;
  double duration = 5.0;
  Signal tau_ref = Signal::constant(1.0);
  Signal tau_d = Signal::constant(0.0);
  Signal tau_di = Signal::constant(0.0);
  ContactMode contact = ContactMode::Bilateral;
  NoiseSpec noise;
  int substeps = 1;
  double q0 = 0.0;
  double dq0 = 0.0;
  /// When false the motor current is held at zero (free response).
  bool controller_enabled = true;

  void validate() const;
};

struct SimSample {
  double t = 0.0;
  double q = 0.0;
  double dq = 0.0;
  double ddq = 0.0;
  double current = 0.0;
  double tau_c = 0.0;
  double tau_c_hat = 0.0;
  double tau_dis_hat = 0.0;
  double ddq_des = 0.0;
  double tau_ref = 0.0;
  bool diverged = false;
};

struct SimTrace {
  double Ts = 0.0;
  std::vector<SimSample> samples;
  bool diverged = false;
};

inline constexpr double kBlowUpBound = 1e9;

struct ZohUpdate {
  Eigen::Matrix2d A;
  Eigen::Vector2d B;  // per unit motor torque
};

/// Exact discretization of J_m ddq = tau - D_env dq - K_env q over dt;
/// K_env = D_env = 0 when the contact is not engaged.
ZohUpdate zoh_plant(double J_m, const EnvModel& env, bool engaged, double dt);

SimTrace run_simulation(const SimScenario& scn);

struct ResponseMetrics {
  double steady_state_error = 0.0;
  double overshoot_pct = 0.0;
  std::optional<double> settling_time;  // nullopt: unsettled
  double rms_estimation_error = 0.0;
  bool diverged = false;
};

/// Step metrics of tau_c against final_ref: steady-state error from the mean
/// of the last 10% of samples, +-2% settling band.
ResponseMetrics compute_metrics(const SimTrace& trace, double final_ref);

struct LinearOracleResponse {
  std::vector<double> tau_c;
  std::vector<double> tau_c_hat;
};

/// Step response of the linear closed loop predicted by force_open_loop, for
/// the reference amplitude of an ideal scenario (bilateral, no noise, no
/// internal disturbance, step reference at t = 0).
LinearOracleResponse linear_response_oracle(const SimScenario& scn, std::size_t n_samples);

}  // namespace rfc
