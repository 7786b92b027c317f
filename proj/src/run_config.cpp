#include "rfc/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rfc {

ServoParams RunConfig::servo() const {
  return {J_m, K_tau, J_mn.value_or(J_m), K_tau_n.value_or(K_tau), J_mi.value_or(J_m), K_tau_i.value_or(K_tau)};
}

EnvModel RunConfig::env() const { return EnvModel(K_env, D_env, m_bind.value_or(J_m), convention); }

namespace {

DerivedRatios resolve_override(const RatioOverrideSpec& r) {
  const int given = int{r.alpha.has_value()} + int{r.beta.has_value()} + int{r.delta.has_value()};
  if (given < 2) throw ConfigError("[ratio_override] needs at least two of alpha, beta, delta", 0);
  DerivedRatios out;
  if (r.alpha && r.beta) {
    out = DerivedRatios::from_alpha_beta(*r.alpha, *r.beta);
    if (r.delta && std::abs(*r.delta - out.delta) > 1e-12 * std::abs(out.delta)) {
      throw ConfigError("[ratio_override] delta must equal alpha / beta", 0);
    }
  } else if (r.alpha) {
    out = DerivedRatios::from_alpha_delta(*r.alpha, *r.delta);
  } else {
    out = DerivedRatios::from_alpha_delta(*r.beta * *r.delta, *r.delta);
  }
  out.validate();
  return out;
}

}  // namespace

ForceLoopConfig RunConfig::force_loop() const {
  ForceLoopConfig cfg{C_tau, servo(), gains, env(), std::nullopt};
  if (ratio_override.present()) cfg.ratio_override = resolve_override(ratio_override);
  cfg.validate();
  return cfg;
}

SimScenario RunConfig::scenario() const {
  SimScenario scn;
  scn.cfg = force_loop();
  scn.duration = simulation.duration;
  scn.tau_ref = simulation.tau_ref_t0 > 0.0 ? Signal::step(simulation.tau_ref, simulation.tau_ref_t0)
                                            : Signal::constant(simulation.tau_ref);
  scn.tau_d = Signal::constant(simulation.tau_d);
  scn.tau_di = Signal::constant(simulation.tau_di);
  scn.contact = simulation.contact;
  scn.noise = {simulation.noise_sigma, simulation.seed};
  scn.substeps = simulation.substeps;
  scn.q0 = simulation.q0;
  scn.dq0 = simulation.dq0;
  scn.validate();
  return scn;
}

SweepGrid RunConfig::sweep_grid() const {
  const ForceLoopConfig cfg = force_loop();
  const DerivedRatios r = cfg.ratios();
  auto pick = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  SweepGrid g;
  g.alpha = pick(sweep.alpha, r.alpha);
  g.delta = pick(sweep.delta, r.delta);
  g.g_dob = pick(sweep.g_dob, gains.g_dob);
  g.g_rtob = pick(sweep.g_rtob, gains.g_rtob);
  g.Ts = pick(sweep.Ts, gains.Ts);
  g.K_env = pick(sweep.K_env, K_env);
  g.D_env = pick(sweep.D_env, D_env);
  g.base_servo = servo();
  g.m_bind = m_bind;
  g.convention = convention;
  g.bode_points = sweep.bode_points;
  g.threads = sweep.threads;
  return g;
}

RunConfig normalize(const RunConfig& in) {
  RunConfig c = in;
  c.J_mn = c.J_mn.value_or(c.J_m);
  c.K_tau_n = c.K_tau_n.value_or(c.K_tau);
  c.J_mi = c.J_mi.value_or(c.J_m);
  c.K_tau_i = c.K_tau_i.value_or(c.K_tau);
  c.m_bind = c.m_bind.value_or(c.J_m);
  if (c.ratio_override.present()) {
    const DerivedRatios r = resolve_override(c.ratio_override);
    c.ratio_override = {r.alpha, r.beta, r.delta};
  }
  const SweepGrid g = c.sweep_grid();
  c.sweep.alpha = g.alpha;
  c.sweep.delta = g.delta;
  c.sweep.g_dob = g.g_dob;
  c.sweep.g_rtob = g.g_rtob;
  c.sweep.Ts = g.Ts;
  c.sweep.K_env = g.K_env;
  c.sweep.D_env = g.D_env;
  return c;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Value {
  enum class Kind { Number, String, Bool, Array };
  Kind kind = Kind::Number;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<double> array;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg, line);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

double parse_number(std::string_view s, int line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail(line, "expected a number, got '" + std::string(s) + "'");
  }
  if (!std::isfinite(v)) fail(line, "number must be finite");
  return v;
}

Value parse_value(std::string_view s, int line) {
  s = trim(s);
  if (s.empty()) fail(line, "missing value");
  Value v;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    v.kind = Value::Kind::String;
    v.text = std::string(s.substr(1, s.size() - 2));
    if (v.text.find('"') != std::string::npos) fail(line, "unexpected quote inside string");
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::Bool;
    v.flag = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated array");
    v.kind = Value::Kind::Array;
    std::string_view body = trim(s.substr(1, s.size() - 2));
    while (!body.empty()) {
      const auto comma = body.find(',');
      v.array.push_back(parse_number(body.substr(0, comma), line));
      if (comma == std::string_view::npos) break;
      body = trim(body.substr(comma + 1));
      if (body.empty()) break;  // trailing comma
    }
    return v;
  }
  v.number = parse_number(s, line);
  return v;
}

double want_number(const Value& v, int line) {
  if (v.kind != Value::Kind::Number) fail(line, "expected a number");
  return v.number;
}

double want_positive(const Value& v, int line) {
  const double x = want_number(v, line);
  if (!(x > 0.0)) fail(line, "value must be positive");
  return x;
}

double want_nonnegative(const Value& v, int line) {
  const double x = want_number(v, line);
  if (!(x >= 0.0)) fail(line, "value must be non-negative");
  return x;
}

std::uint64_t want_count(const Value& v, int line, std::uint64_t min) {
  const double x = want_number(v, line);
  if (x != std::floor(x) || x < static_cast<double>(min) || x > 9.007199254740992e15) {
    fail(line, "expected an integer >= " + std::to_string(min));
  }
  return static_cast<std::uint64_t>(x);
}

std::string want_string(const Value& v, int line) {
  if (v.kind != Value::Kind::String) fail(line, "expected a quoted string");
  return v.text;
}

std::vector<double> want_list(const Value& v, int line) {
  std::vector<double> out;
  if (v.kind == Value::Kind::Number) {
    out.push_back(v.number);
  } else if (v.kind == Value::Kind::Array) {
    out = v.array;
  } else {
    fail(line, "expected a number or an array of numbers");
  }
  if (out.empty()) fail(line, "empty list");
  return out;
}

using Setter = std::function<void(RunConfig&, const Value&, int)>;
using SectionTable = std::map<std::string, Setter, std::less<>>;

const std::map<std::string, SectionTable, std::less<>>& schema() {
  static const std::map<std::string, SectionTable, std::less<>> table = {
      {"plant",
       {{"J_m", [](RunConfig& c, const Value& v, int l) { c.J_m = want_positive(v, l); }},
        {"K_tau", [](RunConfig& c, const Value& v, int l) { c.K_tau = want_positive(v, l); }}}},
      {"nominal",
       {{"J_mn", [](RunConfig& c, const Value& v, int l) { c.J_mn = want_positive(v, l); }},
        {"K_tau_n", [](RunConfig& c, const Value& v, int l) { c.K_tau_n = want_positive(v, l); }}}},
      {"identified",
       {{"J_mi", [](RunConfig& c, const Value& v, int l) { c.J_mi = want_positive(v, l); }},
        {"K_tau_i", [](RunConfig& c, const Value& v, int l) { c.K_tau_i = want_positive(v, l); }}}},
      {"observer",
       {{"g_dob", [](RunConfig& c, const Value& v, int l) { c.gains.g_dob = want_positive(v, l); }},
        {"g_rtob", [](RunConfig& c, const Value& v, int l) { c.gains.g_rtob = want_positive(v, l); }},
        {"Ts", [](RunConfig& c, const Value& v, int l) { c.gains.Ts = want_positive(v, l); }}}},
      {"force",
       {{"C_tau", [](RunConfig& c, const Value& v, int l) { c.C_tau = want_nonnegative(v, l); }},
        {"gain_lo", [](RunConfig& c, const Value& v, int l) { c.gain_lo = want_nonnegative(v, l); }},
        {"gain_hi", [](RunConfig& c, const Value& v, int l) { c.gain_hi = want_positive(v, l); }},
        {"gain_points",
         [](RunConfig& c, const Value& v, int l) { c.gain_points = static_cast<std::size_t>(want_count(v, l, 1)); }}}},
      {"environment",
       {{"K_env", [](RunConfig& c, const Value& v, int l) { c.K_env = want_nonnegative(v, l); }},
        {"D_env", [](RunConfig& c, const Value& v, int l) { c.D_env = want_nonnegative(v, l); }},
        {"m_bind", [](RunConfig& c, const Value& v, int l) { c.m_bind = want_positive(v, l); }},
        {"exponent_convention",
         [](RunConfig& c, const Value& v, int l) {
           try {
             c.convention = exponent_convention_from_string(want_string(v, l));
           } catch (const InvalidInput& e) {
             if (dynamic_cast<const ConfigError*>(&e)) throw;
             fail(l, e.what());
           }
         }}}},
      {"simulation",
       {{"duration", [](RunConfig& c, const Value& v, int l) { c.simulation.duration = want_positive(v, l); }},
        {"tau_ref", [](RunConfig& c, const Value& v, int l) { c.simulation.tau_ref = want_number(v, l); }},
        {"tau_ref_t0", [](RunConfig& c, const Value& v, int l) { c.simulation.tau_ref_t0 = want_nonnegative(v, l); }},
        {"tau_d", [](RunConfig& c, const Value& v, int l) { c.simulation.tau_d = want_number(v, l); }},
        {"tau_di", [](RunConfig& c, const Value& v, int l) { c.simulation.tau_di = want_number(v, l); }},
        {"contact",
         [](RunConfig& c, const Value& v, int l) {
           const std::string s = want_string(v, l);
           if (s == "bilateral") {
             c.simulation.contact = ContactMode::Bilateral;
           } else if (s == "unilateral") {
             c.simulation.contact = ContactMode::Unilateral;
           } else {
             fail(l, "contact must be \"bilateral\" or \"unilateral\"");
           }
         }},
        {"noise_sigma", [](RunConfig& c, const Value& v, int l) { c.simulation.noise_sigma = want_nonnegative(v, l); }},
        {"seed", [](RunConfig& c, const Value& v, int l) { c.simulation.seed = want_count(v, l, 0); }},
        {"substeps",
         [](RunConfig& c, const Value& v, int l) { c.simulation.substeps = static_cast<int>(want_count(v, l, 1)); }},
        {"q0", [](RunConfig& c, const Value& v, int l) { c.simulation.q0 = want_number(v, l); }},
        {"dq0", [](RunConfig& c, const Value& v, int l) { c.simulation.dq0 = want_number(v, l); }}}},
      {"ratio_override",
       {{"alpha", [](RunConfig& c, const Value& v, int l) { c.ratio_override.alpha = want_positive(v, l); }},
        {"beta", [](RunConfig& c, const Value& v, int l) { c.ratio_override.beta = want_positive(v, l); }},
        {"delta", [](RunConfig& c, const Value& v, int l) { c.ratio_override.delta = want_positive(v, l); }}}},
      {"sweep",
       {{"alpha", [](RunConfig& c, const Value& v, int l) { c.sweep.alpha = want_list(v, l); }},
        {"delta", [](RunConfig& c, const Value& v, int l) { c.sweep.delta = want_list(v, l); }},
        {"g_dob", [](RunConfig& c, const Value& v, int l) { c.sweep.g_dob = want_list(v, l); }},
        {"g_rtob", [](RunConfig& c, const Value& v, int l) { c.sweep.g_rtob = want_list(v, l); }},
        {"Ts", [](RunConfig& c, const Value& v, int l) { c.sweep.Ts = want_list(v, l); }},
        {"K_env", [](RunConfig& c, const Value& v, int l) { c.sweep.K_env = want_list(v, l); }},
        {"D_env", [](RunConfig& c, const Value& v, int l) { c.sweep.D_env = want_list(v, l); }},
        {"bode_points",
         [](RunConfig& c, const Value& v, int l) {
           const auto n = want_count(v, l, 1u << 14);
           if ((n & (n - 1)) != 0) fail(l, "bode_points must be a power of two");
           c.sweep.bode_points = static_cast<std::size_t>(n);
         }},
        {"threads",
         [](RunConfig& c, const Value& v, int l) { c.sweep.threads = static_cast<unsigned>(want_count(v, l, 0)); }}}},
  };
  return table;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  const SectionTable* section = nullptr;
  std::string section_name;
  std::set<std::string> seen_sections;
  std::set<std::string> seen_keys;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      const auto it = schema().find(name);
      if (it == schema().end()) fail(line_no, "unknown section [" + name + "]");
      if (!seen_sections.insert(name).second) fail(line_no, "duplicate section [" + name + "]");
      section = &it->second;
      section_name = name;
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(line_no, "missing key");
    if (!section) fail(line_no, "key '" + key + "' outside of any section");
    const auto it = section->find(key);
    if (it == section->end()) fail(line_no, "unknown key '" + key + "' in [" + section_name + "]");
    if (!seen_keys.insert(section_name + "." + key).second) fail(line_no, "duplicate key '" + key + "'");
    it->second(cfg, parse_value(line.substr(eq + 1), line_no), line_no);
  }

  if (!(cfg.gain_lo < cfg.gain_hi)) throw ConfigError("[force] gain_lo must be below gain_hi", 0);
  try {
    (void)cfg.scenario();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("inconsistent configuration: ") + e.what(), 0);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

// ---------------------------------------------------------------------------
// Emission

namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  std::string s(buf, ptr);
  // Keep every value recognisable as a float.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

}  // namespace

std::string emit_run_config(const RunConfig& in) {
  const RunConfig c = normalize(in);
  std::ostringstream os;
  os << "[plant]\nJ_m = " << num(c.J_m) << "\nK_tau = " << num(c.K_tau) << "\n\n";
  os << "[nominal]\nJ_mn = " << num(*c.J_mn) << "\nK_tau_n = " << num(*c.K_tau_n) << "\n\n";
  os << "[identified]\nJ_mi = " << num(*c.J_mi) << "\nK_tau_i = " << num(*c.K_tau_i) << "\n\n";
  os << "[observer]\ng_dob = " << num(c.gains.g_dob) << "\ng_rtob = " << num(c.gains.g_rtob)
     << "\nTs = " << num(c.gains.Ts) << "\n\n";
  os << "[force]\nC_tau = " << num(c.C_tau) << "\ngain_lo = " << num(c.gain_lo) << "\ngain_hi = " << num(c.gain_hi)
     << "\ngain_points = " << c.gain_points << "\n\n";
  os << "[environment]\nK_env = " << num(c.K_env) << "\nD_env = " << num(c.D_env) << "\nm_bind = " << num(*c.m_bind)
     << "\nexponent_convention = \"" << to_string(c.convention) << "\"\n\n";
  const SimulationSection& s = c.simulation;
  os << "[simulation]\nduration = " << num(s.duration) << "\ntau_ref = " << num(s.tau_ref)
     << "\ntau_ref_t0 = " << num(s.tau_ref_t0) << "\ntau_d = " << num(s.tau_d) << "\ntau_di = " << num(s.tau_di)
     << "\ncontact = \"" << to_string(s.contact) << "\"\nnoise_sigma = " << num(s.noise_sigma)
     << "\nseed = " << s.seed << "\nsubsteps = " << s.substeps << "\nq0 = " << num(s.q0) << "\ndq0 = " << num(s.dq0)
     << "\n\n";
  if (c.ratio_override.present()) {
    os << "[ratio_override]\nalpha = " << num(*c.ratio_override.alpha) << "\nbeta = " << num(*c.ratio_override.beta)
       << "\ndelta = " << num(*c.ratio_override.delta) << "\n\n";
  }
  const SweepSection& w = c.sweep;
  os << "[sweep]\nalpha = " << list(w.alpha) << "\ndelta = " << list(w.delta) << "\ng_dob = " << list(w.g_dob)
     << "\ng_rtob = " << list(w.g_rtob) << "\nTs = " << list(w.Ts) << "\nK_env = " << list(w.K_env)
     << "\nD_env = " << list(w.D_env) << "\nbode_points = " << w.bode_points << "\nthreads = " << w.threads << "\n";
  return os.str();
}

}  // namespace rfc
