#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rfc/observer_models.hpp"
#include "rfc/rational_tf.hpp"

namespace rfc {

/// Normalized frequencies omega*Ts, strictly increasing, inside (-pi, pi].
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> points);

  /// n cell midpoints of (-pi, pi).
  static FrequencyGrid uniform_midpoint(std::size_t n);
  /// n points from -pi (exclusive) to pi (inclusive).
  static FrequencyGrid uniform_endpoint(std::size_t n);
  /// n log-spaced points between lo and hi, both in (0, pi].
  static FrequencyGrid log_spaced(double lo, double hi, std::size_t n);

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<double> points_;
};

struct FrequencyResponse {
  std::vector<double> omega_ts;
  std::vector<double> magnitude_db;  // +inf at a pole
  std::vector<double> phase_deg;     // unwrapped; NaN at a pole
};

FrequencyResponse frequency_response(const RationalTF& tf, const FrequencyGrid& grid);

inline constexpr std::size_t kDefaultBodePoints = std::size_t{1} << 20;

struct BodeIntegral {
  double value = 0.0;
  std::size_t n_points = 0;
  /// True when S has a pole on or outside the unit circle; the zero
  /// right-hand side of the discrete Bode integral no longer applies.
  bool flagged = false;
  std::string note;
};

/// Composite midpoint estimate of the integral of ln|S(e^{jw})| over (-pi, pi).
BodeIntegral bode_integral(const RationalTF& S, std::size_t n_points = kDefaultBodePoints);

/// Peak of |S(e^{jw})| (absolute, not dB). Throws UnsupportedModel for an
/// S that is not asymptotically stable.
double sensitivity_peak(const RationalTF& S);

struct LocusBranch {
  std::vector<double> gains;
  /// branch_points[i][b]: pole of branch b at gains[i].
  std::vector<std::vector<Complex>> branch_points;
  std::vector<double> spectral_radius;
};

/// Closed-loop poles of unity feedback around k * L for every k in gains,
/// i.e. roots of den(L) + k num(L), with branches continued by greedy
/// nearest-neighbour matching between consecutive gains.
LocusBranch root_locus(const RationalTF& loop_at_unit_gain, const std::vector<double>& gains);

std::vector<double> log_spaced(double lo, double hi, std::size_t n);

struct CriticalGainOptions {
  double lo = 1e-6;
  double hi = 1e6;
  std::size_t scan_points = 241;
  double rel_tol = 1e-6;
};

enum class CriticalGainStatus { Crossing, StableThroughout, UnstableAtLowGain };

const char* to_string(CriticalGainStatus s);

struct CriticalGain {
  /// +inf when stable over the whole bracket, 0 when unstable already at
  /// the low end.
  double value = std::numeric_limits<double>::infinity();
  CriticalGainStatus status = CriticalGainStatus::StableThroughout;
};

/// Smallest gain k at which the spectral radius of den(L) + k num(L)
/// crosses 1: log-spaced scan, then bisection to relative tolerance.
CriticalGain critical_gain(const RationalTF& loop_at_unit_gain, const CriticalGainOptions& opts = {});

/// Bisection on delta for the point where the largest zero of Phi_n reaches
/// the unit circle. Throws NoCrossing when the bracket has no sign change.
double min_phase_boundary(const EnvModel& env, const ObserverGains& gains, double delta_lo, double delta_hi);

/// max |z| over the zeros of Phi_n.
double max_zero_magnitude(const EnvModel& env, double delta, const ObserverGains& gains);

struct SweepGrid {
  std::vector<double> alpha{1.0};
  std::vector<double> delta{1.0};
  std::vector<double> g_dob{500.0};
  std::vector<double> g_rtob{500.0};
  std::vector<double> Ts{1e-3};
  std::vector<double> K_env{1000.0};
  std::vector<double> D_env{10.0};
  ServoParams base_servo;
  std::optional<double> m_bind;  // defaults to base_servo.J_m
  ExponentConvention convention = ExponentConvention::XiOmega0;
  std::size_t bode_points = std::size_t{1} << 16;
  double eps = kDefaultStabilityBand;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRecord {
  double alpha = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double g_dob = 0.0;
  double g_rtob = 0.0;
  double Ts = 0.0;
  double K_env = 0.0;
  double D_env = 0.0;
  double sensitivity_peak = std::numeric_limits<double>::quiet_NaN();
  double bode_integral = std::numeric_limits<double>::quiet_NaN();
  double critical_gain = std::numeric_limits<double>::quiet_NaN();
  double max_zero_magnitude = std::numeric_limits<double>::quiet_NaN();
  bool nmp_flag = false;
  std::string status = "ok";  // or the failure message for this row
};

/// One record per grid tuple in lexicographic order of
/// (alpha, delta, g_dob, g_rtob, Ts, K_env, D_env). Failures are recorded in
/// the row.
std::vector<SweepRecord> design_sweep(const SweepGrid& grid);

/// Loop at C_tau = 1 with pole-zero pairs cancelled; the form root_locus and
/// critical_gain expect.
RationalTF unit_gain_loop(const ForceLoopConfig& cfg);

}  // namespace rfc
