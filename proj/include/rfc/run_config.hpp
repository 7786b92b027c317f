#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfc/analysis.hpp"
#include "rfc/errors.hpp"
#include "rfc/observer_models.hpp"
#include "rfc/simulator.hpp"

namespace rfc {

/// Malformed or inconsistent configuration text. line() is 1-based, 0 when
/// the problem is not tied to one line.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& what, int line) : InvalidInput(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct RatioOverrideSpec {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> delta;

  bool present() const { return alpha || beta || delta; }
  bool operator==(const RatioOverrideSpec&) const = default;
};

struct SimulationSection {
  double duration = 5.0;
  double tau_ref = 1.0;
  double tau_ref_t0 = 0.0;  // step time of the reference
  double tau_d = 0.0;
  double tau_di = 0.0;
  ContactMode contact = ContactMode::Bilateral;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  int substeps = 1;
  double q0 = 0.0;
  double dq0 = 0.0;

  bool operator==(const SimulationSection&) const = default;
};

struct SweepSection {
  // Empty lists fall back to the single value of the surrounding config.
  std::vector<double> alpha;
  std::vector<double> delta;
  std::vector<double> g_dob;
  std::vector<double> g_rtob;
  std::vector<double> Ts;
  std::vector<double> K_env;
  std::vector<double> D_env;
  std::size_t bode_points = std::size_t{1} << 16;
  unsigned threads = 0;

  bool operator==(const SweepSection&) const = default;
};

/// Everything a workbench run can be configured with. Nominal and identified
/// parameters left unset take the plant values; m_bind left unset takes J_m.
struct RunConfig {
  double J_m = 0.1;
  double K_tau = 0.5;
  std::optional<double> J_mn;
  std::optional<double> K_tau_n;
  std::optional<double> J_mi;
  std::optional<double> K_tau_i;

  ObserverGains gains;

  double C_tau = 0.6;
  double gain_lo = 1e-3;
  double gain_hi = 1e3;
  std::size_t gain_points = 400;

  double K_env = 1000.0;
  double D_env = 10.0;
  std::optional<double> m_bind;
  ExponentConvention convention = ExponentConvention::XiOmega0;

  RatioOverrideSpec ratio_override;
  SimulationSection simulation;
  SweepSection sweep;

  bool operator==(const RunConfig&) const = default;

  ServoParams servo() const;
  EnvModel env() const;
  ForceLoopConfig force_loop() const;
  SimScenario scenario() const;
  SweepGrid sweep_grid() const;
};

RunConfig parse_run_config(std::string_view text);
/// Throws ConfigError (line 0) when the file cannot be read.
RunConfig load_run_config(const std::string& path);

/// Canonical text form with every field written out; parse_run_config reads
/// it back to an equal RunConfig.
std::string emit_run_config(const RunConfig& cfg);

/// Fills every defaulted optional with its resolved value and completes a
/// two-of-three ratio override.
RunConfig normalize(const RunConfig& cfg);

}  // namespace rfc
