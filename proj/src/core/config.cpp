#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "output.hpp"

namespace qbeat {

namespace {

enum class Kind { Double, Int, Uint64, Bool, String, List };

struct KeySpec {
  const char* key;
  Kind kind;
  const char* def;
  double lo, hi;             // numeric range (inclusive); ignored otherwise
  const char* choices;       // '|'-separated for String
};

const KeySpec kSchema[] = {
    {"system.scheme", Kind::String, "full", 0, 0, "full|fourlevel"},
    {"system.ground_f", Kind::Int, "3", 0, 10, nullptr},
    {"system.excited_f", Kind::Int, "4", 0, 10, nullptr},
    {"system.ground_gf", Kind::Double, "0.3333333333333333", -10, 10, nullptr},
    {"system.excited_gf", Kind::Double, "0.5", -10, 10, nullptr},
    {"system.b_gauss", Kind::Double, "5", -1000, 1000, nullptr},
    {"system.g_mhz", Kind::Double, "1.5", 0, 1e6, nullptr},
    {"system.kappa_mhz", Kind::Double, "3.0", 1e-9, 1e6, nullptr},
    {"system.gamma_mhz", Kind::Double, "6.07", 1e-9, 1e6, nullptr},
    {"system.delta_a_mhz", Kind::Double, "0", -1e6, 1e6, nullptr},
    {"system.delta_c_mhz", Kind::Double, "0", -1e6, 1e6, nullptr},
    {"system.n_photons", Kind::Double, "1.21", 0, 1e3, nullptr},
    {"system.fock_v", Kind::Int, "3", 1, 256, nullptr},
    {"system.fock_h", Kind::Int, "3", -1, 256, nullptr},
    {"system.fourlevel_larmor_mhz", Kind::Double, "1.1665", -1e3, 1e3, nullptr},
    {"system.fourlevel_delta_mhz", Kind::Double, "0.607", -1e3, 1e3, nullptr},
    {"system.displaced_frame", Kind::Bool, "false", 0, 0, nullptr},
    {"system.dim_budget", Kind::Int, "65536", 2, 1 << 24, nullptr},
    {"beam.enabled", Kind::Bool, "false", 0, 0, nullptr},
    {"beam.n_eff", Kind::Double, "0.55", 0, 100, nullptr},
    {"beam.v_mps", Kind::Double, "13.5", 1e-3, 1e4, nullptr},
    {"beam.waist_um", Kind::Double, "56", 1e-3, 1e5, nullptr},
    {"beam.wavelength_nm", Kind::Double, "780.24", 1, 1e5, nullptr},
    {"beam.tilt_rad", Kind::Double, "0.017", -1.5, 1.5, nullptr},
    {"beam.max_atoms", Kind::Int, "2", 1, 8, nullptr},
    {"beam.rho0_halfwidth_waists", Kind::Double, "2.0", 0, 10, nullptr},
    {"beam.rate_per_us", Kind::Double, "0", 0, 1e6, nullptr},
    {"beam.stationary_start", Kind::Bool, "true", 0, 0, nullptr},
    {"feedback.enabled", Kind::Bool, "false", 0, 0, nullptr},
    {"feedback.epsilon", Kind::Double, "0", 0, 1, nullptr},
    {"feedback.t_fb_us", Kind::Double, "3.0", 0, 1e4, nullptr},
    {"feedback.latency_us", Kind::Double, "0", 0, 1e4, nullptr},
    {"feedback.retrigger", Kind::String, "ignore", 0, 0, "ignore|extend"},
    {"feedback.herald", Kind::String, "H", 0, 0, "H|V"},
    {"detection.hwp_deg", Kind::Double, "0", -360, 360, nullptr},
    {"detection.eta_h", Kind::Double, "1", 0, 1, nullptr},
    {"detection.eta_v", Kind::Double, "1", 0, 1, nullptr},
    {"ensemble.trajectories", Kind::Int, "1000", 1, 100000000, nullptr},
    {"ensemble.seed", Kind::Uint64, "1", 0, 0, nullptr},
    {"ensemble.workers", Kind::Int, "0", 0, 4096, nullptr},
    {"ensemble.duration_us", Kind::Double, "100", 1e-6, 1e7, nullptr},
    {"ensemble.warmup_us", Kind::Double, "0", 0, 1e6, nullptr},
    {"ensemble.dt_tol", Kind::Double, "1e-8", 1e-14, 1e-2, nullptr},
    {"ensemble.sample_dt_us", Kind::Double, "0", 0, 1e6, nullptr},
    {"ensemble.atom_init", Kind::String, "pumped_m0", 0, 0,
     "pumped_m0|uniform|ground_coherence"},
    {"ensemble.cavity_init", Kind::String, "steady", 0, 0, "steady|vacuum"},
    {"analysis.bin_ns", Kind::Double, "50", 1e-3, 1e9, nullptr},
    {"analysis.max_tau_us", Kind::Double, "10", 1e-3, 1e6, nullptr},
    {"analysis.fit_guard_us", Kind::Double, "0.2", 0, 1e3, nullptr},
    {"analysis.fit_span_us", Kind::Double, "3.0", 1e-3, 1e4, nullptr},
    {"analysis.herald", Kind::String, "H", 0, 0, "H|V"},
    {"analysis.target", Kind::String, "H", 0, 0, "H|V"},
    {"analysis.eps_list", Kind::List, "0,0.05,0.25,0.5,1", 0, 1, nullptr},
    {"analysis.n_list", Kind::List, "0.05,0.1,0.2,0.3,0.4", 0, 1e3, nullptr},
    {"analysis.fit_lo_us", Kind::Double, "2", 0, 1e6, nullptr},
    {"analysis.fit_hi_us", Kind::Double, "48", 0, 1e6, nullptr},
    {"analysis.theory_delta_min_mhz", Kind::Double, "-3.035", -1e4, 1e4, nullptr},
    {"analysis.theory_delta_max_mhz", Kind::Double, "3.035", -1e4, 1e4, nullptr},
    {"analysis.theory_points", Kind::Int, "100", 2, 100000, nullptr},
};

const KeySpec* find_spec(const std::string& key) {
  for (const auto& s : kSchema)
    if (key == s.key) return &s;
  return nullptr;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw std::runtime_error(where + ": " + msg);
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail(where, "not a number: '" + v + "'");
  }
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& s : kSchema) values_[s.key] = s.def;
}

void RunConfig::validate(const std::string& key, const std::string& value,
                         const std::string& where) const {
  const KeySpec* spec = find_spec(key);
  if (!spec) fail(where, "unknown key '" + key + "'");
  switch (spec->kind) {
    case Kind::Double: {
      const double x = parse_double(value, where);
      if (x < spec->lo || x > spec->hi)
        fail(where, key + " = " + value + " outside [" +
                        format_double(spec->lo) + ", " + format_double(spec->hi) +
                        "]");
      break;
    }
    case Kind::Int: {
      const double x = parse_double(value, where);
      if (x != std::floor(x)) fail(where, key + " must be an integer");
      if (x < spec->lo || x > spec->hi)
        fail(where, key + " = " + value + " outside [" +
                        format_double(spec->lo) + ", " + format_double(spec->hi) +
                        "]");
      break;
    }
    case Kind::Uint64: {
      try {
        (void)std::stoull(value);
      } catch (const std::exception&) {
        fail(where, key + " must be a non-negative integer");
      }
      break;
    }
    case Kind::Bool: {
      if (value != "true" && value != "false")
        fail(where, key + " must be true or false");
      break;
    }
    case Kind::String: {
      std::string choices = spec->choices;
      std::stringstream ss(choices);
      std::string c;
      bool ok = false;
      while (std::getline(ss, c, '|'))
        if (c == value) ok = true;
      if (!ok) fail(where, key + " must be one of {" + choices + "}");
      break;
    }
    case Kind::List: {
      std::stringstream ss(value);
      std::string item;
      int n = 0;
      while (std::getline(ss, item, ',')) {
        const double x = parse_double(trim(item), where);
        if (x < spec->lo || x > spec->hi)
          fail(where, key + " entry " + item + " outside range");
        ++n;
      }
      if (n == 0) fail(where, key + " must contain at least one value");
      break;
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  validate(key, value, "<override>");
  values_[key] = value;
}

RunConfig RunConfig::from_text(const std::string& text,
                               const std::string& origin) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    std::string s = line;
    const size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(where, "expected 'section.key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.find('.') == std::string::npos)
      fail(where, "key '" + key + "' lacks a section prefix");
    cfg.validate(key, value, where);
    cfg.values_[key] = value;
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open config file");
  std::stringstream buf;
  buf << f.rdbuf();
  return from_text(buf.str(), path);
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::runtime_error("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  return parse_double(get(key), key);
}
int RunConfig::get_int(const std::string& key) const {
  return static_cast<int>(get_double(key));
}
bool RunConfig::get_bool(const std::string& key) const {
  return get(key) == "true";
}
uint64_t RunConfig::get_uint64(const std::string& key) const {
  return std::stoull(get(key));
}
std::vector<double> RunConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_double(trim(item), key));
  return out;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : values_) {
    if (k == "ensemble.workers") continue;  // runtime-only knob
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SystemModel RunConfig::system_model() const {
  SystemModel m;
  const std::string scheme = get("system.scheme");
  if (scheme == "fourlevel") {
    FourLevelScheme fl;
    fl.g = mhz_to_radus(get_double("system.g_mhz"));
    fl.gamma = mhz_to_radus(get_double("system.gamma_mhz"));
    fl.larmor = mhz_to_radus(get_double("system.fourlevel_larmor_mhz"));
    fl.delta = mhz_to_radus(get_double("system.fourlevel_delta_mhz"));
    m.scheme = fl.lower();
  } else {
    m.scheme = build_level_scheme(get_int("system.ground_f"),
                                  get_int("system.excited_f"),
                                  get_double("system.ground_gf"),
                                  get_double("system.excited_gf"),
                                  get_double("system.b_gauss"))
                   .lower();
  }
  m.n_slots = get_bool("beam.enabled") ? get_int("beam.max_atoms") : 1;
  m.fock_v = get_int("system.fock_v");
  m.fock_h = get_int("system.fock_h");
  m.g_max = mhz_to_radus(get_double("system.g_mhz"));
  m.kappa = mhz_to_radus(get_double("system.kappa_mhz"));
  m.gamma = mhz_to_radus(get_double("system.gamma_mhz"));
  m.delta_a = mhz_to_radus(get_double("system.delta_a_mhz"));
  m.delta_c = mhz_to_radus(get_double("system.delta_c_mhz"));
  m.set_n_photons(get_double("system.n_photons"));
  m.hwp_deg = get_double("detection.hwp_deg");
  m.eta1 = get_double("detection.eta_h");
  m.eta2 = get_double("detection.eta_v");
  m.displaced = get_bool("system.displaced_frame");
  m.dim_budget = get_int("system.dim_budget");
  return m;
}

EngineConfig RunConfig::engine_config() const {
  EngineConfig e;
  e.duration_us = get_double("ensemble.duration_us");
  e.warmup_us = get_double("ensemble.warmup_us");
  e.master_seed = get_uint64("ensemble.seed");
  e.trajectories = get_int("ensemble.trajectories");
  e.workers = get_int("ensemble.workers");
  e.dt_tol = get_double("ensemble.dt_tol");
  e.beam.enabled = get_bool("beam.enabled");
  e.beam.n_eff = get_double("beam.n_eff");
  e.beam.v_mps = get_double("beam.v_mps");
  e.beam.waist_um = get_double("beam.waist_um");
  e.beam.wavelength_nm = get_double("beam.wavelength_nm");
  e.beam.tilt_rad = get_double("beam.tilt_rad");
  e.beam.max_atoms = get_int("beam.max_atoms");
  e.beam.rho0_halfwidth_w = get_double("beam.rho0_halfwidth_waists");
  e.beam.rate_per_us = get_double("beam.rate_per_us");
  e.stationary_start = get_bool("beam.stationary_start");
  e.feedback.enabled = get_bool("feedback.enabled");
  e.feedback.epsilon = get_double("feedback.epsilon");
  e.feedback.t_fb_us = get_double("feedback.t_fb_us");
  e.feedback.latency_us = get_double("feedback.latency_us");
  e.feedback.retrigger = get("feedback.retrigger") == "extend"
                             ? RetriggerPolicy::ExtendWindow
                             : RetriggerPolicy::IgnoreDuringWindow;
  e.herald_channel = get("feedback.herald")[0];
  e.sample_dt_us = get_double("ensemble.sample_dt_us");
  const std::string ai = get("ensemble.atom_init");
  e.atom_init = ai == "uniform" ? AtomInit::Uniform
                : ai == "ground_coherence" ? AtomInit::GroundCoherence
                                           : AtomInit::PumpedM0;
  e.cavity_init = get("ensemble.cavity_init") == "vacuum" ? CavityInit::Vacuum
                                                          : CavityInit::Steady;
  return e;
}

AnalysisOptions RunConfig::analysis_options() const {
  AnalysisOptions a;
  a.bin_us = get_double("analysis.bin_ns") * 1e-3;
  a.max_tau_us = get_double("analysis.max_tau_us");
  a.fit_guard_us = get_double("analysis.fit_guard_us");
  a.fit_span_us = get_double("analysis.fit_span_us");
  a.herald = get("analysis.herald")[0];
  a.target = get("analysis.target")[0];
  return a;
}

}  // namespace qbeat
