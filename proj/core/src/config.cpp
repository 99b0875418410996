#include "qnforce/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "qnforce/constants.hpp"
#include "qnforce/noise.hpp"

namespace qnforce {

namespace {

using constants::two_pi;

const std::set<std::string> kSections = {"mechanics", "circuit", "cavity",
                                         "signal", "sweep"};

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"mechanics", {"mass", "spring_constant", "resonance_hz", "damping_hz"}},
    {"circuit",
     {"t_v", "turns", "coil_radius", "field", "inductance", "c_l",
      "circuit_resonance_hz", "l_m", "t_x", "c_x0", "c_p", "plate_area",
      "gap", "v_dc"}},
    {"cavity",
     {"kappa_hz", "detuning_hz", "coupling_hz", "gx_hz", "sql_target_hz",
      "n_bm", "alpha", "eta_e", "eta_b", "bare_g_q", "bare_g_x", "bare_g_b"}},
    {"signal", {"dm_mass", "impact_parameter", "velocity"}},
    {"sweep",
     {"r_min", "r_max", "points", "rho", "aspect_ratio", "turn_density",
      "field", "z0_voltage", "z0_current", "l_over_lm", "target_hz",
      "target_hz_position", "b_over_r", "kappa_hz", "resonance_hz_base",
      "velocity", "dm_mass"}},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double require(const std::map<std::string, double>& section,
               const std::string& section_name, const std::string& key) {
  const auto it = section.find(key);
  if (it == section.end())
    throw ConfigError("missing key '" + key + "' in section [" +
                      section_name + "]");
  return it->second;
}

std::optional<double> maybe(const std::map<std::string, double>& section,
                            const std::string& key) {
  const auto it = section.find(key);
  if (it == section.end()) return std::nullopt;
  return it->second;
}

}  // namespace

FileConfig parse_config(std::istream& in) {
  FileConfig cfg;
  std::map<std::string, std::map<std::string, double>*> sections = {
      {"mechanics", &cfg.mechanics},
      {"circuit", &cfg.circuit},
      {"cavity", &cfg.cavity},
      {"signal", &cfg.signal},
      {"sweep", &cfg.sweep},
  };

  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError("malformed section header", lineno, 1);
      const std::string name = trim(body.substr(1, body.size() - 2));
      if (!kSections.count(name))
        throw ConfigError("unknown section [" + name + "]", lineno, 1);
      current = name;
      continue;
    }

    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", lineno, 1);
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const int col = static_cast<int>(line.find(key)) + 1;
    if (current.empty())
      throw ConfigError("key '" + key + "' outside any section", lineno, col);
    if (!kKnownKeys.at(current).count(key))
      throw ConfigError("unknown key '" + key + "' in section [" + current +
                            "]",
                        lineno, col);
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
      throw ConfigError("could not parse numeric value '" + value + "'",
                        lineno, static_cast<int>(eq) + 2);
    auto& section = *sections.at(current);
    if (section.count(key))
      throw ConfigError("duplicate key '" + key + "'", lineno, col);
    section[key] = v;
  }
  return cfg;
}

FileConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in);
}

namespace {

// Tracks which keys a builder consumed so foreign leftovers can be
// rejected (a t_x in a voice-coil file is a mistake, not dead weight).
class KeyLedger {
 public:
  KeyLedger(const std::map<std::string, double>& section, std::string name)
      : section_(section), name_(std::move(name)) {}

  double require(const std::string& key) {
    used_.insert(key);
    return ::qnforce::require(section_, name_, key);
  }
  std::optional<double> maybe(const std::string& key) {
    used_.insert(key);
    return ::qnforce::maybe(section_, key);
  }
  void check_exhausted() const {
    for (const auto& [key, value] : section_)
      if (!used_.count(key))
        throw ConfigError("key '" + key + "' in section [" + name_ +
                          "] does not apply to this detector case");
  }

 private:
  const std::map<std::string, double>& section_;
  std::string name_;
  std::set<std::string> used_;
};

double spring_constant_from(KeyLedger& mech, double mass) {
  const auto k_direct = mech.maybe("spring_constant");
  const auto f_m = mech.maybe("resonance_hz");
  if (k_direct && f_m)
    throw ConfigError(
        "give either spring_constant or resonance_hz, not both");
  if (!k_direct && !f_m)
    throw ConfigError("missing spring_constant or resonance_hz");
  return k_direct ? *k_direct : mass * (two_pi * *f_m) * (two_pi * *f_m);
}

}  // namespace

DetectorParams build_detector_params(const FileConfig& cfg,
                                     const DetectorCase& c) {
  KeyLedger mech(cfg.mechanics, "mechanics");
  KeyLedger cir(cfg.circuit, "circuit");
  const double mass = mech.require("mass");
  const double k = spring_constant_from(mech, mass);

  DetectorParams out;
  if (c.magnetomechanical()) {
    MagnetoMechParams p;
    p.m = mass;
    p.k = k;
    const auto tv = cir.maybe("t_v");
    const bool coil = cfg.has(cfg.circuit, "turns");
    if (tv && coil)
      throw ConfigError(
          "give either t_v or turns/coil_radius/field, not both");
    if (tv) {
      p.T_v = *tv;
    } else {
      p.T_v = transducer_constant_v(cir.require("turns"),
                                    cir.require("coil_radius"),
                                    cir.require("field"));
    }
    p.L = cir.require("inductance");
    const auto cl = cir.maybe("c_l");
    if (cl && cfg.has(cfg.circuit, "circuit_resonance_hz"))
      throw ConfigError(
          "give either c_l or circuit_resonance_hz, not both");
    if (cl) {
      p.C_L = *cl;
    } else {
      const double fc = cir.require("circuit_resonance_hz");
      p.C_L = 1.0 / (p.L * (two_pi * fc) * (two_pi * fc));
    }
    p.L_M = cir.maybe("l_m");
    p.validate();
    out = DetectorParams(p);
  } else {
    const bool reduced = cfg.has(cfg.circuit, "t_x");
    const bool full = cfg.has(cfg.circuit, "v_dc");
    if (reduced && full)
      throw ConfigError(
          "give either the reduced transducer (t_x, c_x0) or the full "
          "geometry (plate_area, gap, v_dc), not both");
    if (reduced) {
      ReducedElectroMechParams p;
      p.m = mass;
      p.k_eff = k;
      p.T_x = cir.require("t_x");
      p.C_x0 = cir.require("c_x0");
      p.C_P = cir.require("c_p");
      p.L = cir.require("inductance");
      p.L_M = cir.maybe("l_m");
      p.validate();
      out = DetectorParams(p);
    } else if (full) {
      ElectroMechParams p;
      p.m = mass;
      p.k = k;
      p.A = cir.require("plate_area");
      p.d0 = cir.require("gap");
      p.V_DC = cir.require("v_dc");
      p.C_P = cir.require("c_p");
      p.L = cir.require("inductance");
      p.L_M = cir.maybe("l_m");
      p.validate();
      const auto eq = find_equilibrium(p);
      out = DetectorParams(reduce(p, eq));
    } else {
      throw ConfigError(
          "electromechanical case needs t_x/c_x0 or plate_area/gap/v_dc");
    }
  }
  mech.check_exhausted();
  cir.check_exhausted();
  return out;
}

CavityParams build_cavity(const FileConfig& cfg, const DetectorCase& c,
                          const DetectorParams& params) {
  const auto& cav = cfg.cavity;
  CavityParams out;
  out.kappa = two_pi * require(cav, "cavity", "kappa_hz");
  out.Delta = two_pi * maybe(cav, "detuning_hz").value_or(0.0);

  for (const char* key :
       {"alpha", "eta_e", "eta_b", "bare_g_q", "bare_g_x", "bare_g_b"})
    if (const auto v = maybe(cav, key)) out.provenance[key] = *v;

  const auto g_direct = maybe(cav, "coupling_hz");
  const auto g_target = maybe(cav, "sql_target_hz");
  if (g_direct && g_target)
    throw ConfigError("give either coupling_hz or sql_target_hz, not both");
  if (g_direct) {
    out.G = two_pi * *g_direct;
  } else if (g_target) {
    out.G = optimized_coupling(c, params, out, two_pi * *g_target);
  } else {
    throw ConfigError("missing coupling_hz or sql_target_hz in [cavity]");
  }

  if (c.kind == CaseKind::EmVoltage) {
    if (const auto gx = maybe(cav, "gx_hz")) {
      out.G_x = two_pi * *gx;
    } else {
      // Slave the direct position coupling to the charge coupling through
      // the transducer constant.
      const auto& em = std::get<ReducedElectroMechParams>(params);
      out.G_x = em.T_x * out.G;
    }
  } else if (maybe(cav, "gx_hz")) {
    throw ConfigError("gx_hz applies to the em-voltage case only");
  }
  out.validate();
  return out;
}

ThermalModel build_thermal(const FileConfig& cfg) {
  ThermalModel t;
  t.N_BM = maybe(cfg.cavity, "n_bm").value_or(0.0);
  if (t.N_BM < 0) throw ConfigError("n_bm must be non-negative");
  return t;
}

DmEncounter build_encounter(const FileConfig& cfg) {
  if (cfg.signal.empty())
    throw ConfigError("missing [signal] section");
  DmEncounter e;
  e.m = require(cfg.mechanics, "mechanics", "mass");
  e.m_dm =
      maybe(cfg.signal, "dm_mass").value_or(constants::planck_mass);
  e.b = require(cfg.signal, "signal", "impact_parameter");
  e.v = require(cfg.signal, "signal", "velocity");
  e.validate();
  return e;
}

SweepSpec build_sweep(const FileConfig& cfg) {
  const auto& sw = cfg.sweep;
  SweepSpec spec;
  if (const auto v = maybe(sw, "r_min")) spec.r_min = *v;
  if (const auto v = maybe(sw, "r_max")) spec.r_max = *v;
  if (const auto v = maybe(sw, "points"))
    spec.points = static_cast<std::size_t>(*v);

  auto& c = spec.config;
  if (const auto v = maybe(sw, "rho")) c.rho = *v;
  if (const auto v = maybe(sw, "aspect_ratio")) c.h_over_R = *v;
  if (const auto v = maybe(sw, "turn_density")) c.n = *v;
  if (const auto v = maybe(sw, "field")) c.B = *v;
  if (const auto v = maybe(sw, "z0_voltage")) c.Z0_v = *v;
  if (const auto v = maybe(sw, "z0_current")) c.Z0_x = *v;
  if (const auto v = maybe(sw, "l_over_lm")) c.L_over_LM = *v;
  if (const auto v = maybe(sw, "target_hz")) c.nu_star_base = two_pi * *v;
  if (const auto v = maybe(sw, "target_hz_position"))
    c.nu_star_base_position = two_pi * *v;
  if (const auto v = maybe(sw, "b_over_r")) c.b_over_R = *v;
  if (const auto v = maybe(sw, "kappa_hz")) c.kappa = two_pi * *v;
  if (const auto v = maybe(sw, "resonance_hz_base"))
    c.omega_m_base = two_pi * *v;
  if (const auto v = maybe(sw, "velocity")) c.v = *v;
  if (const auto v = maybe(sw, "dm_mass")) c.m_dm = *v;
  return spec;
}

}  // namespace qnforce
