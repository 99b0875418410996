#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qnforce/cases.hpp"
#include "qnforce/dynamics.hpp"
#include "qnforce/params.hpp"

namespace qnforce {

// White Brownian-motion force-noise floor.
struct ThermalModel {
  double N_BM = 0;  // N^2/Hz
};

// One force-noise PSD sample, all components in N^2/Hz.
struct PsdPoint {
  double total = 0;
  double backaction = 0;
  double shot = 0;
  double thermal = 0;
};

// Force-noise spectrum over a frequency grid.  total = backaction + shot +
// thermal holds pointwise by construction.
struct NoiseSpectrum {
  std::vector<double> nu_grid;  // rad/s
  std::vector<double> total;
  std::vector<double> backaction;
  std::vector<double> shot;
  std::vector<double> thermal;

  struct PointFlag {
    std::size_t index;
    std::string what;
  };
  std::vector<PointFlag> flags;  // non-fatal per-point conditions
};

// PSD from the matrix-resolvent estimator coefficients.
PsdPoint psd_numeric(const DetectorCase& c, const DetectorParams& p,
                     const CavityParams& cavity, const ThermalModel& thermal,
                     double nu);

// PSD from the explicit closed forms (zero detuning).  For the
// electromechanical voltage readout this is the full expression including
// the direct position coupling, not the G_x -> 0 truncation.
PsdPoint psd_closed_form(const DetectorCase& c, const DetectorParams& p,
                         const CavityParams& cavity,
                         const ThermalModel& thermal, double nu);

// Coupling strength that balances backaction and shot noise at nu_star.
// For em-voltage the optimization is over the charge coupling only; the
// caller slaves G_x = T_x * G if the direct coupling is wanted.
double optimized_coupling(const DetectorCase& c, const DetectorParams& p,
                          const CavityParams& cavity_template, double nu_star);

// Reference optomechanical sensor (position or velocity coupled), with
// mechanical damping mu.
struct OptomechRefParams {
  double m = 0;        // kg
  double omega_m = 0;  // rad/s
  double kappa = 0;    // rad/s
  double mu = 0;       // rad/s mechanical damping
  double G = 0;        // rad/s per m, position coupling
  double G_prime = 0;  // rad/s per (kg m/s); velocity coupling
};

enum class OptomechMode { Position, Velocity };

// Enforce the velocity-coupling relation G' = G/(m kappa).
void slave_velocity_coupling(OptomechRefParams* p);

// Position-sensing SQL coupling at nu_star.
double optomech_optimized_coupling(const OptomechRefParams& p,
                                   double nu_star);

PsdPoint optomech_reference_psd(OptomechMode mode, const OptomechRefParams& p,
                                const ThermalModel& thermal, double nu);

// Map psd_numeric (or the closed form) over a grid; per-point failures are
// recorded as flags rather than thrown.
NoiseSpectrum noise_breakdown(const DetectorCase& c, const DetectorParams& p,
                              const CavityParams& cavity,
                              const ThermalModel& thermal,
                              const std::vector<double>& nu_grid,
                              bool closed_form = false);

// Log-spaced ordinary-frequency grid [f_min, f_max] Hz, returned in rad/s.
std::vector<double> log_grid_rad(double f_min_hz, double f_max_hz,
                                 std::size_t points);

// CSV emission: one `#`-prefixed provenance line, one column-name line, then
// `freq_hz,total,backaction,shot,thermal` rows in %.12e.
void write_spectrum_csv(std::ostream& os, const NoiseSpectrum& s,
                        const std::string& comment);

}  // namespace qnforce
