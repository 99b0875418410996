#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "qnforce/cases.hpp"
#include "qnforce/params.hpp"
#include "qnforce/scaling.hpp"
#include "qnforce/signal.hpp"

namespace qnforce {

// Parsed key/value sections of a detector configuration file.  The format
// is line-oriented: `[section]` headers, `key = value` pairs, `#` comments.
// Unknown sections or keys are rejected at parse time.  All external
// frequencies are ordinary Hz; conversion to angular happens exactly once
// when parameter objects are built.
struct FileConfig {
  std::map<std::string, double> mechanics;
  std::map<std::string, double> circuit;
  std::map<std::string, double> cavity;
  std::map<std::string, double> signal;
  std::map<std::string, double> sweep;

  bool has(const std::map<std::string, double>& s,
           const std::string& key) const {
    return s.count(key) != 0;
  }
};

FileConfig parse_config(std::istream& in);
FileConfig parse_config_file(const std::string& path);

// Detector parameters appropriate for the case.  Full electromechanical
// descriptions (plate geometry plus bias) are reduced through the
// equilibrium solve; reduced descriptions are passed through.
DetectorParams build_detector_params(const FileConfig& cfg,
                                     const DetectorCase& c);

// Cavity parameters; a coupling is taken from `coupling_hz` or computed as
// the SQL-optimized value at `sql_target_hz`.  For em-voltage the direct
// position coupling defaults to the slaved value T_x * G unless `gx_hz` is
// given.
CavityParams build_cavity(const FileConfig& cfg, const DetectorCase& c,
                          const DetectorParams& params);

ThermalModel build_thermal(const FileConfig& cfg);

// Encounter from the [signal] section; sensor mass comes from [mechanics].
DmEncounter build_encounter(const FileConfig& cfg);

struct SweepSpec {
  ScalingConfig config;
  double r_min = 1e-3;
  double r_max = 1.0;
  std::size_t points = 30;
};

SweepSpec build_sweep(const FileConfig& cfg);

}  // namespace qnforce
