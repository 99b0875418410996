#pragma once

#include <functional>

#include "qnforce/quadrature.hpp"

namespace qnforce {

// One dark-matter flyby: candidate of mass m_dm passing a sensor of mass m
// at impact parameter b with speed v.
struct DmEncounter {
  double m_dm = 0;  // kg
  double b = 0;     // m
  double v = 0;     // m/s
  double m = 0;     // kg sensor mass

  double tau() const { return b / v; }  // signal timescale
  void validate() const;
};

enum class SignalForm { Exact, Approx };

// Transverse gravitational force pulse in the time domain.
double dm_force_time(const DmEncounter& e, double t);

// Modified Bessel function of the second kind, order one.  Ascending series
// below x = 2, Steed's continued fraction above; relative error < 1e-10 over
// [1e-6, 700], underflowing to zero beyond.
double bessel_k1(double x);

// Spectral amplitude of the pulse; `Approx` is the exponential envelope
// form used for SNR estimates.
double dm_force_freq(const DmEncounter& e, double nu, SignalForm form);

struct SnrResult {
  double snr_sq = 0;
  double nu_min = 0;         // rad/s integration window actually used
  double nu_max = 0;         // rad/s
  double quadrature_error = 0;  // relative estimate
  long evaluations = 0;
};

struct SnrOptions {
  SignalForm form = SignalForm::Approx;
  double nu_min = 0;     // 0: default 2*pi*0.1 rad/s
  double nu_max = 0;     // 0: default 40 v/b
  double rel_tol = 1e-6;
};

// Matched-filter SNR^2 = \int_0^inf |F(nu)|^2 / S_FF(nu) dnu, evaluated by
// adaptive Simpson on a log-frequency axis.  `psd` returns the total force
// PSD in N^2/Hz at an angular frequency.
SnrResult snr_opt(const DmEncounter& e,
                  const std::function<double(double)>& psd,
                  const SnrOptions& opt = {});

struct SqlBenchmark {
  double delta_f = 0;   // N
  double ratio_sq = 0;  // (peak_force / delta_f)^2
};

// Free-particle position-monitoring noise floor for measurements separated
// by tau, and the squared signal-to-floor ratio for a given peak force.
SqlBenchmark sql_benchmark(double sensor_mass, double tau, double peak_force);

}  // namespace qnforce
