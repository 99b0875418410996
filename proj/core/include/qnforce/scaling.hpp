#pragma once

#include <string>
#include <vector>

#include "qnforce/constants.hpp"
#include "qnforce/noise.hpp"
#include "qnforce/params.hpp"
#include "qnforce/signal.hpp"

namespace qnforce {

// Radius-scaling rules for the magnetomechanical sensor family.  The sensor
// is a cylinder of fixed aspect ratio and density; coil turn count, field,
// and the LC characteristic impedances are held fixed, so every circuit
// element follows from the radius.  The spring constant is held at its
// base-radius value, so the mechanical resonance falls as R^(-3/2).
struct ScalingConfig {
  double rho = 7500.0;                                  // kg/m^3
  double h_over_R = 40.0;                               // aspect ratio
  double n = 7725.0;                                    // turns/m
  double B = 1.0;                                       // T
  double Z0_v = constants::two_pi * 1e2;                // ohm, voltage readout
  double Z0_x = constants::two_pi;                      // ohm, current readout
  double L_over_LM = 1e4;
  double nu_star_base = constants::two_pi * 1e6;        // rad/s at R_base
  double nu_star_base_position = constants::two_pi * 1e5;
  double R_base = 1e-3;                                 // m
  double b_over_R = 1.0;                                // impact parameter/R
  double kappa = constants::two_pi * 1e6;               // rad/s
  double omega_m_base = constants::two_pi * 10.0;       // rad/s at R_base
  double v = 2e5;                                       // m/s DM speed
  double m_dm = constants::planck_mass;                 // kg

  double k_base() const {
    return rho * constants::pi * R_base * R_base * (h_over_R * R_base) *
           omega_m_base * omega_m_base;
  }
};

enum class SweepReadout { Voltage, Current };

// Full parameter set at radius R: mechanics, SQL-optimized cavity coupling
// at the scaled target frequency, and the matching encounter geometry.
struct ScaledPoint {
  MagnetoMechParams mech;
  CavityParams cavity;
  DmEncounter encounter;
  double nu_star = 0;  // rad/s
};

ScaledPoint scale_parameters(double R, const ScalingConfig& cfg,
                             SweepReadout readout);

struct SweepRow {
  double R = 0;
  double snr2_voltage = 0;
  double snr2_current = 0;
  double snr2_position = 0;
  double snr2_sql = 0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // per-point diagnostics
};

// SNR^2 of the four monitored schemes over a radius grid.  Per-point
// failures are recorded and the sweep continues.
SweepTable radius_sweep(const std::vector<double>& r_grid,
                        const ScalingConfig& cfg);

// Column accessors for the sweep table plus per-column SNR^2 at a single
// radius (used for gap evaluation off-grid).
double sweep_snr2_voltage(double R, const ScalingConfig& cfg);
double sweep_snr2_current(double R, const ScalingConfig& cfg);
double sweep_snr2_position(double R, const ScalingConfig& cfg);
double sweep_snr2_sql(double R, const ScalingConfig& cfg);

// Least-squares slope of log10(y) against log10(x).
double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y);

// Log-spaced radius grid in meters.
std::vector<double> log_radius_grid(double r_min, double r_max,
                                    std::size_t points);

}  // namespace qnforce
