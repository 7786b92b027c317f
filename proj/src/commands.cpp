#include "rfc/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "rfc/analysis.hpp"
#include "rfc/csv.hpp"
#include "rfc/run_config.hpp"
#include "rfc/simulator.hpp"

namespace rfc::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  return f;
}

std::string quoted(const std::string& path) {
  // Gnuplot single-quoted strings: double any embedded quote.
  std::string s = "'";
  for (char c : path) s += c == '\'' ? std::string("''") : std::string(1, c);
  return s + "'";
}

std::string file_name(const std::string& path) { return std::filesystem::path(path).filename().string(); }

// Log-spaced when lo > 0, otherwise uniform from 0.
std::vector<double> gain_grid(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  if (lo > 0.0) return log_spaced(lo, hi, n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = hi * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> parse_gain_range(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw ConfigError("--gains must be lo:hi:n", 0);
  double lo = 0.0;
  double hi = 0.0;
  long n = 0;
  try {
    std::size_t used = 0;
    lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("hi");
    n = std::stol(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::exception&) {
    throw ConfigError("--gains must be lo:hi:n with numeric fields", 0);
  }
  if (!(lo >= 0.0) || !(hi >= lo) || n < 1 || !std::isfinite(hi)) {
    throw ConfigError("--gains needs 0 <= lo <= hi and n >= 1", 0);
  }
  return gain_grid(lo, hi, static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------------------

int cmd_freqresp(const RunConfig& rc, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  const ForceLoopConfig cfg = rc.force_loop();
  const double alpha = cfg.ratios().alpha;
  const double Ts = cfg.gains.Ts;
  const RationalTF S = inner_sensitivity(alpha, cfg.gains);
  const RationalTF T = inner_complementary(alpha, cfg.gains);
  const FrequencyGrid grid = FrequencyGrid::log_spaced(1e-2 * cfg.gains.g_dob * Ts, std::numbers::pi, 1024);
  const FrequencyResponse rs = frequency_response(S, grid);
  const FrequencyResponse rt = frequency_response(T, grid);

  double peak_t_db = -std::numeric_limits<double>::infinity();
  double peak_s_grid = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    peak_t_db = std::max(peak_t_db, rt.magnitude_db[i]);
    peak_s_grid = std::max(peak_s_grid, rs.magnitude_db[i]);
  }
  double peak_s_db = peak_s_grid;
  if (classify_stability(S).stable()) {
    peak_s_db = 20.0 * std::log10(sensitivity_peak(S));
  } else {
    err << "warning: S is not asymptotically stable; peak taken from the grid\n";
  }

  if (!opts.out.empty()) {
    auto f = open_out(opts.out);
    write_csv_header(f, {"omega_rad_s", "mag_S_dB", "phase_S_deg", "mag_T_dB", "phase_T_deg"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      write_csv_row(f, {grid.points()[i] / Ts, rs.magnitude_db[i], rs.phase_deg[i], rt.magnitude_db[i], rt.phase_deg[i]});
    }
    auto gp = open_out(script_path_for(opts.out));
    gp << "set datafile separator ','\n"
       << "set logscale x\n"
       << "set xlabel 'omega [rad/s]'\n"
       << "set ylabel 'magnitude [dB]'\n"
       << "set grid\n"
       << "set label 1 sprintf('peak |S| = %.3f dB', " << format_double(peak_s_db) << ") at graph 0.05, graph 0.9\n"
       << "set label 2 sprintf('peak |T| = %.3f dB', " << format_double(peak_t_db) << ") at graph 0.05, graph 0.82\n"
       << "plot " << quoted(file_name(opts.out)) << " using 1:2 with lines title 'S', \\\n"
       << "     '' using 1:4 with lines title 'T'\n";
  }
  out << "alpha_g_Ts=" << format_double(alpha * cfg.gains.g_dob * Ts) << " peak_S_dB=" << format_double(peak_s_db)
      << " peak_T_dB=" << format_double(peak_t_db) << "\n";
  return kExitOk;
}

int cmd_bodeintegral(const RunConfig& rc, const CommandOptions& opts, std::ostream& out, std::ostream&) {
  const ForceLoopConfig cfg = rc.force_loop();
  const double alpha = cfg.ratios().alpha;
  const RationalTF S = inner_sensitivity(alpha, cfg.gains);
  const BodeIntegral bi = bode_integral(S);
  const bool stable = classify_stability(S).stable();
  const double peak = stable ? sensitivity_peak(S) : std::numeric_limits<double>::infinity();
  const bool pass = !bi.flagged && std::abs(bi.value) < 1e-3;

  std::ostringstream line;
  line << "integral=" << format_double(bi.value) << " n_points=" << bi.n_points
       << " sensitivity_peak=" << format_double(peak) << " pole=" << format_double(1.0 - alpha * cfg.gains.g_dob * cfg.gains.Ts)
       << " verdict=" << (pass ? "PASS" : "FLAG");
  if (bi.flagged) line << " reason=unstable_sensitivity";
  else if (!pass) line << " reason=outside_tolerance";
  line << "\n";
  out << line.str();
  if (!opts.out.empty()) open_out(opts.out) << line.str();
  return kExitOk;
}

int cmd_rootlocus(const RunConfig& rc, const CommandOptions& opts, std::ostream& out, std::ostream&) {
  const ForceLoopConfig cfg = rc.force_loop();
  const std::vector<double> gains =
      opts.gains ? parse_gain_range(*opts.gains) : gain_grid(rc.gain_lo, rc.gain_hi, rc.gain_points);
  const RationalTF loop = unit_gain_loop(cfg);
  const LocusBranch locus = root_locus(loop, gains);
  const CriticalGain cg = critical_gain(loop);

  std::size_t n_branches = 0;
  if (!opts.out.empty()) {
    auto f = open_out(opts.out);
    write_csv_header(f, {"gain", "branch", "re", "im", "abs"});
    for (std::size_t i = 0; i < locus.gains.size(); ++i) {
      const auto& poles = locus.branch_points[i];
      n_branches = std::max(n_branches, poles.size());
      for (std::size_t b = 0; b < poles.size(); ++b) {
        write_csv_row(f, {locus.gains[i], static_cast<double>(b), poles[b].real(), poles[b].imag(), std::abs(poles[b])});
      }
    }
    auto gp = open_out(script_path_for(opts.out));
    gp << "set datafile separator ','\n"
       << "set size square\n"
       << "set xlabel 'Re z'\n"
       << "set ylabel 'Im z'\n"
       << "set grid\n"
       << "set parametric\n"
       << "set trange [0:2*pi]\n"
       << "plot cos(t), sin(t) with lines lc 'black' title 'unit circle', \\\n"
       << "     for [b=0:" << (n_branches ? n_branches - 1 : 0) << "] " << quoted(file_name(opts.out))
       << " using ($2==b ? $3 : 1/0):4 with lines title sprintf('branch %d', b)\n";
  }
  out << "critical_gain=" << format_double(cg.value) << " status=" << to_string(cg.status) << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& rc, const CommandOptions& opts, std::ostream& out, std::ostream&) {
  SimScenario scn = rc.scenario();
  if (opts.seed) scn.noise.seed = *opts.seed;
  const SimTrace trace = run_simulation(scn);
  const ResponseMetrics m = compute_metrics(trace, scn.tau_ref.final_value());
  const StabilityReport verdict = classify_stability(tf_feedback(force_open_loop(scn.cfg)));

  std::ostringstream trailer;
  trailer << "steady_state_error=" << format_double(m.steady_state_error) << "\n"
          << "overshoot_pct=" << format_double(m.overshoot_pct) << "\n"
          << "settling_time=" << (m.settling_time ? format_double(*m.settling_time) : std::string("unsettled")) << "\n"
          << "rms_estimation_error=" << format_double(m.rms_estimation_error) << "\n"
          << "diverged=" << (m.diverged ? "true" : "false") << "\n"
          << "closed_loop=" << to_string(verdict.stability) << "\n"
          << "spectral_radius=" << format_double(verdict.spectral_radius) << "\n"
          << "seed=" << scn.noise.seed << "\n";

  if (!opts.out.empty()) {
    auto f = open_out(opts.out);
    write_csv_header(f, {"t", "q", "dq", "ddq", "current", "tau_c", "tau_c_hat", "tau_ref"});
    for (const SimSample& s : trace.samples) {
      write_csv_row(f, {s.t, s.q, s.dq, s.ddq, s.current, s.tau_c, s.tau_c_hat, s.tau_ref});
    }
    std::istringstream lines(trailer.str());
    for (std::string l; std::getline(lines, l);) f << "# " << l << "\n";

    auto gp = open_out(script_path_for(opts.out));
    gp << "set datafile separator ','\n"
       << "set datafile commentschars '#'\n"
       << "set xlabel 't [s]'\n"
       << "set ylabel 'torque [N m]'\n"
       << "set grid\n"
       << "plot " << quoted(file_name(opts.out)) << " using 1:8 with lines title 'tau_ref', \\\n"
       << "     '' using 1:6 with lines title 'tau_c', \\\n"
       << "     '' using 1:7 with lines title 'tau_c hat'\n";
  }
  out << trailer.str();
  return kExitOk;
}

int cmd_sweep(const RunConfig& rc, const CommandOptions& opts, std::ostream& out, std::ostream&) {
  const std::vector<SweepRecord> rows = design_sweep(rc.sweep_grid());
  std::size_t failures = 0;
  std::ostringstream notes;
  std::ostringstream csv;
  write_csv_header(csv, {"alpha", "delta", "beta", "g_dob", "g_rtob", "Ts", "K_env", "D_env", "sensitivity_peak",
                         "bode_integral", "critical_gain", "max_zero_magnitude", "nmp_flag", "ok"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRecord& r = rows[i];
    const bool ok = r.status == "ok";
    write_csv_row(csv, {r.alpha, r.delta, r.beta, r.g_dob, r.g_rtob, r.Ts, r.K_env, r.D_env, r.sensitivity_peak,
                        r.bode_integral, r.critical_gain, r.max_zero_magnitude, r.nmp_flag ? 1.0 : 0.0, ok ? 1.0 : 0.0});
    if (!ok) {
      ++failures;
      notes << "# row " << i << ": " << r.status << "\n";
    }
  }
  if (!opts.out.empty()) open_out(opts.out) << csv.str() << notes.str();
  out << "rows=" << rows.size() << " failed_rows=" << failures << "\n";
  return kExitOk;
}

}  // namespace

std::string script_path_for(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".gp").string();
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  using Handler = std::function<int(const RunConfig&, const CommandOptions&, std::ostream&, std::ostream&)>;
  Handler handler;
  if (name == "freqresp") handler = cmd_freqresp;
  else if (name == "bodeintegral") handler = cmd_bodeintegral;
  else if (name == "rootlocus") handler = cmd_rootlocus;
  else if (name == "simulate") handler = cmd_simulate;
  else if (name == "sweep") handler = cmd_sweep;
  else {
    err << "error: unknown command '" << name << "'\n";
    return kExitConfig;
  }

  RunConfig rc;
  try {
    rc = load_run_config(opts.config);
    if (opts.gains) (void)parse_gain_range(*opts.gains);
  } catch (const std::exception& e) {
    err << "config error: " << opts.config << ": " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    return handler(rc, opts, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace rfc::cli
