#include "qnforce/scaling.hpp"

#include <cmath>
#include <limits>

#include "qnforce/dynamics.hpp"

namespace qnforce {

namespace {

using constants::G_newton;
using constants::pi;
using constants::two_pi;

DmEncounter encounter_at(double R, const ScalingConfig& cfg, double mass) {
  DmEncounter e;
  e.m = mass;
  e.m_dm = cfg.m_dm;
  e.v = cfg.v;
  e.b = cfg.b_over_R * R;
  return e;
}

// Integration window for the sweep: keep the backaction-evasion null of the
// scaled detector inside the domain (the mechanical resonance drops as
// R^(-3/2) and would otherwise fall below the default lower cutoff).
SnrOptions sweep_snr_options(double omega_m_at_R) {
  SnrOptions opt;
  opt.nu_min = std::min(two_pi * 0.1, omega_m_at_R / 30.0);
  return opt;
}

}  // namespace

ScaledPoint scale_parameters(double R, const ScalingConfig& cfg,
                             SweepReadout readout) {
  if (!(R > 0)) throw DomainError("radius must be positive");
  ScaledPoint out;

  const double h = cfg.h_over_R * R;
  const double turns = cfg.n * h;
  auto& mech = out.mech;
  mech.m = cfg.rho * pi * R * R * h;
  mech.k = cfg.k_base();
  mech.T_v = transducer_constant_v(turns, R, cfg.B);
  mech.L = constants::mu0 * turns * turns * pi * R * R / h;
  mech.L_M = mech.L / cfg.L_over_LM;
  // Fixed characteristic impedance of the sensed LC loop: the full coil for
  // voltage readout, the readout branch for current readout.  With the
  // default impedances both give the same C_L(R).
  mech.C_L = (readout == SweepReadout::Voltage)
                 ? mech.L / (cfg.Z0_v * cfg.Z0_v)
                 : *mech.L_M / (cfg.Z0_x * cfg.Z0_x);
  mech.validate();

  out.nu_star = cfg.nu_star_base * cfg.R_base / R;
  out.cavity.kappa = cfg.kappa;
  const DetectorCase det = make_case(readout == SweepReadout::Voltage
                                         ? CaseKind::MmVoltage
                                         : CaseKind::MmCurrent);
  out.cavity.G =
      optimized_coupling(det, DetectorParams(mech), out.cavity, out.nu_star);
  out.encounter = encounter_at(R, cfg, mech.m);
  return out;
}

double sweep_snr2_voltage(double R, const ScalingConfig& cfg) {
  const auto pt = scale_parameters(R, cfg, SweepReadout::Voltage);
  const DetectorCase det = make_case(CaseKind::MmVoltage);
  const DetectorParams params(pt.mech);
  const ThermalModel thermal;
  const auto psd = [&](double nu) {
    return psd_closed_form(det, params, pt.cavity, thermal, nu).total;
  };
  return snr_opt(pt.encounter, psd, sweep_snr_options(pt.mech.omega_m()))
      .snr_sq;
}

double sweep_snr2_current(double R, const ScalingConfig& cfg) {
  const auto pt = scale_parameters(R, cfg, SweepReadout::Current);
  const DetectorCase det = make_case(CaseKind::MmCurrent);
  const DetectorParams params(pt.mech);
  const ThermalModel thermal;
  const auto psd = [&](double nu) {
    return psd_closed_form(det, params, pt.cavity, thermal, nu).total;
  };
  return snr_opt(pt.encounter, psd, sweep_snr_options(pt.mech.omega_m()))
      .snr_sq;
}

double sweep_snr2_position(double R, const ScalingConfig& cfg) {
  const double h = cfg.h_over_R * R;
  OptomechRefParams p;
  p.m = cfg.rho * pi * R * R * h;
  p.omega_m = std::sqrt(cfg.k_base() / p.m);
  p.kappa = cfg.kappa;
  p.mu = 0.0;
  const double nu_star = cfg.nu_star_base_position * cfg.R_base / R;
  p.G = optomech_optimized_coupling(p, nu_star);
  slave_velocity_coupling(&p);

  const ThermalModel thermal;
  const auto psd = [&](double nu) {
    return optomech_reference_psd(OptomechMode::Position, p, thermal, nu)
        .total;
  };
  return snr_opt(encounter_at(R, cfg, p.m), psd,
                 sweep_snr_options(p.omega_m))
      .snr_sq;
}

double sweep_snr2_sql(double R, const ScalingConfig& cfg) {
  const double h = cfg.h_over_R * R;
  const double mass = cfg.rho * pi * R * R * h;
  const auto e = encounter_at(R, cfg, mass);
  const double peak = G_newton * mass * cfg.m_dm / (e.b * e.b);
  return sql_benchmark(mass, e.tau(), peak).ratio_sq;
}

SweepTable radius_sweep(const std::vector<double>& r_grid,
                        const ScalingConfig& cfg) {
  if (r_grid.empty()) throw ConfigError("radius grid is empty");
  for (const double r : r_grid)
    if (!(r >= 1e-3 && r <= 1.0))
      throw ConfigError("radius grid must lie within [1e-3, 1] m");

  SweepTable table;
  for (const double r : r_grid) {
    SweepRow row;
    row.R = r;
    auto run = [&](double* dst, double (*fn)(double, const ScalingConfig&),
                   const char* name) {
      try {
        *dst = fn(r, cfg);
      } catch (const Error& err) {
        table.failures.push_back("R=" + std::to_string(r) + " " + name +
                                 ": " + err.what());
        *dst = std::numeric_limits<double>::quiet_NaN();
      }
    };
    run(&row.snr2_voltage, &sweep_snr2_voltage, "voltage");
    run(&row.snr2_current, &sweep_snr2_current, "current");
    run(&row.snr2_position, &sweep_snr2_position, "position");
    run(&row.snr2_sql, &sweep_snr2_sql, "sql");
    table.rows.push_back(row);
  }
  return table;
}

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("slope fit needs at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0) || !std::isfinite(y[i])) continue;
    const double lx = std::log10(x[i]);
    const double ly = std::log10(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw DomainError("slope fit needs at least two valid samples");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

std::vector<double> log_radius_grid(double r_min, double r_max,
                                    std::size_t points) {
  if (!(r_min > 0) || points == 0) throw ConfigError("bad radius grid");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = r_min;
    return out;
  }
  if (!(r_max > r_min)) throw ConfigError("bad radius grid");
  const double a = std::log10(r_min), b = std::log10(r_max);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) /
                                static_cast<double>(points - 1));
  return out;
}

}  // namespace qnforce
