#pragma once

#include <string>

#include "qnforce/errors.hpp"

namespace qnforce {

// Detector family x readout combination.
enum class CaseKind {
  MmVoltage,  // magnetomechanical, voltage readout (electric field sensing)
  MmCurrent,  // magnetomechanical, current readout (magnetic field sensing)
  EmVoltage,  // electromechanical, voltage readout
  EmCurrent,  // electromechanical, current readout
};

// A detector/readout combination plus the circuit gauge choice.  The gauge
// selects the spanning tree of the magnetomechanical circuit; it changes the
// internal p and Phi dynamics but not any observable.  Electromechanical
// cases have a single gauge.
struct DetectorCase {
  CaseKind kind = CaseKind::MmVoltage;
  int gauge = 1;  // 1 or 2; meaningful for magnetomechanical cases only

  bool magnetomechanical() const {
    return kind == CaseKind::MmVoltage || kind == CaseKind::MmCurrent;
  }
  bool voltage_readout() const {
    return kind == CaseKind::MmVoltage || kind == CaseKind::EmVoltage;
  }
  bool current_readout() const { return !voltage_readout(); }
};

inline std::string case_name(CaseKind kind) {
  switch (kind) {
    case CaseKind::MmVoltage: return "mm-voltage";
    case CaseKind::MmCurrent: return "mm-current";
    case CaseKind::EmVoltage: return "em-voltage";
    case CaseKind::EmCurrent: return "em-current";
  }
  return "unknown";
}

inline std::string case_name(const DetectorCase& c) {
  std::string s = case_name(c.kind);
  if (c.magnetomechanical()) s += " (gauge " + std::to_string(c.gauge) + ")";
  return s;
}

inline CaseKind parse_case_kind(const std::string& name) {
  if (name == "mm-voltage") return CaseKind::MmVoltage;
  if (name == "mm-current") return CaseKind::MmCurrent;
  if (name == "em-voltage") return CaseKind::EmVoltage;
  if (name == "em-current") return CaseKind::EmCurrent;
  throw ConfigError("unknown detector case '" + name + "'");
}

inline DetectorCase make_case(CaseKind kind, int gauge = 1) {
  if (gauge != 1 && gauge != 2)
    throw ConfigError("gauge must be 1 or 2");
  if ((kind == CaseKind::EmVoltage || kind == CaseKind::EmCurrent) &&
      gauge != 1)
    throw ConfigError("electromechanical cases have a single gauge");
  return DetectorCase{kind, gauge};
}

}  // namespace qnforce
