#include "qnforce/noise.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "qnforce/constants.hpp"

namespace qnforce {

namespace {

using constants::hbar;

double sq(double v) { return v * v; }

PsdPoint assemble(double backaction, double shot, double n_bm) {
  PsdPoint p;
  p.backaction = backaction;
  p.shot = shot;
  p.thermal = n_bm;
  p.total = backaction + shot + n_bm;
  return p;
}

const ReducedElectroMechParams& as_em(const DetectorParams& p) {
  return std::get<ReducedElectroMechParams>(p);
}

const MagnetoMechParams& as_mm(const DetectorParams& p) {
  return std::get<MagnetoMechParams>(p);
}

}  // namespace

PsdPoint psd_numeric(const DetectorCase& c, const DetectorParams& p,
                     const CavityParams& cavity, const ThermalModel& thermal,
                     double nu) {
  const auto sol = estimator_coefficients(c, p, cavity, nu);
  return assemble(0.5 * std::norm(sol.beta), 0.5 * std::norm(sol.gamma),
                  thermal.N_BM);
}

PsdPoint psd_closed_form(const DetectorCase& c, const DetectorParams& p,
                         const CavityParams& cavity,
                         const ThermalModel& thermal, double nu) {
  if (cavity.Delta != 0.0)
    throw DomainError("closed-form PSD requires zero detuning");
  const auto f = derived_frequencies(c, p);
  const double kappa = cavity.kappa;
  const double lorentz = kappa * kappa / 4.0 + nu * nu;
  const double nu2 = nu * nu;
  const double w_m2 = sq(f.omega_m);
  const double w_c2 = sq(f.omega_c);
  const double w_l2 = sq(f.omega_l);
  const double d2 = sq(f.delta);

  double backaction = 0, shot = 0;
  switch (c.kind) {
    case CaseKind::MmVoltage: {
      const auto& mm = as_mm(p);
      const double G2 = sq(cavity.G);
      const double den = (nu2 - w_m2) * (nu2 - w_c2) - d2 * nu2;
      backaction = hbar * hbar * G2 * kappa * mm.m * sq(nu2 - w_m2) /
                   (2.0 * mm.L * d2 * nu2 * lorentz);
      shot = mm.m * mm.L * lorentz * sq(den) / (2.0 * G2 * kappa * d2 * nu2);
      break;
    }
    case CaseKind::MmCurrent: {
      const auto& mm = as_mm(p);
      const double G2 = sq(cavity.G);
      // (nu^2-w_m^2)(nu^2-w_c^2-w_l^2) - d^2(nu^2-w_l^2), rearranged about
      // the backaction null so the noise floor there is resolvable.
      const double den =
          (nu2 - w_m2 - d2) * (nu2 - w_c2 - w_l2) - d2 * w_c2;
      backaction = hbar * hbar * G2 * kappa * mm.m * mm.L *
                   sq(nu2 - w_m2 - d2) / (2.0 * d2 * lorentz);
      shot = mm.m * lorentz * sq(den) /
             (2.0 * G2 * kappa * mm.L * d2 * sq(w_c2));
      break;
    }
    case CaseKind::EmVoltage: {
      const auto& em = as_em(p);
      const double GQ = cavity.G;
      const double Gx = cavity.G_x;
      const double tx_cp = em.T_x / em.C_P;
      const double den = (nu2 - w_m2) * (nu2 - w_c2) - d2 * w_c2;
      const double num_x = GQ * GQ * em.m * (nu2 - w_m2) -
                           2.0 * GQ * Gx * tx_cp +
                           Gx * Gx * em.L * (nu2 - w_c2);
      const double num_f = GQ * tx_cp - Gx * em.L * (nu2 - w_c2);
      backaction =
          hbar * hbar * kappa * sq(num_x) / (2.0 * lorentz * sq(num_f));
      shot = sq(em.m) * sq(em.L) * lorentz * sq(den) /
             (2.0 * kappa * sq(num_f));
      break;
    }
    case CaseKind::EmCurrent: {
      const auto& em = as_em(p);
      const double G2 = sq(cavity.G);
      // (nu^2-w_m^2)(nu^2-w_c^2-w_l^2) - d^2(w_c^2+w_l^2), rearranged about
      // the backaction null so the noise floor there is resolvable.
      const double den =
          (nu2 - w_m2 + d2) * (nu2 - w_c2 - w_l2) - d2 * nu2;
      backaction = hbar * hbar * G2 * kappa * em.m * em.L * w_c2 *
                   sq(nu2 - w_m2 + d2) / (2.0 * d2 * nu2 * lorentz);
      shot = em.m * lorentz * sq(den) /
             (2.0 * G2 * kappa * em.L * d2 * w_c2 * nu2);
      break;
    }
  }
  if (!std::isfinite(backaction) || !std::isfinite(shot))
    throw PoleSingularityError("closed-form PSD evaluated at a real pole");
  return assemble(backaction, shot, thermal.N_BM);
}

double optimized_coupling(const DetectorCase& c, const DetectorParams& p,
                          const CavityParams& cavity_template,
                          double nu_star) {
  const auto s = susceptibilities(c, p, cavity_template, nu_star);
  const double abs_chi_k2 = std::norm(s.chi_kappa);
  const double abs_chi_lc = std::abs(s.chi_lc);
  if (abs_chi_lc == 0 || !std::isfinite(abs_chi_lc))
    throw DegenerateOptimumError(
        "coupling optimization degenerate at the target frequency");

  double g2 = 0;
  switch (c.kind) {
    case CaseKind::MmVoltage: {
      const auto& mm = as_mm(p);
      g2 = mm.L / (hbar * abs_chi_k2 * abs_chi_lc);
      break;
    }
    case CaseKind::MmCurrent: {
      const auto& mm = as_mm(p);
      const double w_c2 = 1.0 / (mm.L * mm.C_L);
      g2 = 1.0 / (hbar * abs_chi_k2 * abs_chi_lc * mm.L * w_c2);
      break;
    }
    case CaseKind::EmVoltage: {
      const auto& em = as_em(p);
      g2 = em.L / (hbar * abs_chi_k2 * abs_chi_lc);
      break;
    }
    case CaseKind::EmCurrent: {
      const auto& em = as_em(p);
      const auto f = derived_frequencies(c, p);
      const double w_ce2 = 1.0 / (em.L * em.C_eff());
      const double mod = std::abs(1.0 - sq(f.delta) * s.chi_m);
      g2 = 1.0 / (hbar * abs_chi_k2 * abs_chi_lc * mod * em.L * w_ce2);
      break;
    }
  }
  if (!(g2 > 0) || !std::isfinite(g2))
    throw DegenerateOptimumError("optimized coupling not finite");
  return std::sqrt(g2);
}

void slave_velocity_coupling(OptomechRefParams* p) {
  p->G_prime = p->G / (p->m * p->kappa);
}

double optomech_optimized_coupling(const OptomechRefParams& p,
                                   double nu_star) {
  const std::complex<double> chi_m =
      -1.0 / std::complex<double>(
                 p.m * (nu_star * nu_star - p.omega_m * p.omega_m),
                 p.m * p.mu * nu_star);
  const std::complex<double> chi_c =
      std::sqrt(p.kappa) / std::complex<double>(p.kappa / 2.0, -nu_star);
  return 1.0 / std::sqrt(hbar * std::abs(chi_m) * std::norm(chi_c));
}

PsdPoint optomech_reference_psd(OptomechMode mode, const OptomechRefParams& p,
                                const ThermalModel& thermal, double nu) {
  if (p.mu < 0) throw DomainError("mechanical damping must be non-negative");
  const std::complex<double> chi_c =
      std::sqrt(p.kappa) / std::complex<double>(p.kappa / 2.0, -nu);
  const std::complex<double> chi_m =
      -1.0 /
      std::complex<double>(p.m * (nu * nu - p.omega_m * p.omega_m),
                           p.m * p.mu * nu);
  const std::complex<double> phase =
      std::complex<double>(-p.kappa / 2.0, -nu) /
      std::complex<double>(p.kappa / 2.0, -nu);
  const std::complex<double> i_unit(0.0, 1.0);

  std::complex<double> beta, gamma;
  if (mode == OptomechMode::Position) {
    beta = -p.G * hbar * chi_c;
    gamma = phase / (p.G * chi_c * chi_m);
  } else {
    if (nu == 0.0)
      throw PoleSingularityError("velocity-mode estimator singular at nu = 0");
    beta = -i_unit * p.G_prime * hbar * chi_c * p.m * p.omega_m * p.omega_m /
           nu;
    gamma = i_unit * phase / (p.G_prime * p.m * nu * chi_c * chi_m);
  }
  return assemble(0.5 * std::norm(beta), 0.5 * std::norm(gamma),
                  thermal.N_BM);
}

NoiseSpectrum noise_breakdown(const DetectorCase& c, const DetectorParams& p,
                              const CavityParams& cavity,
                              const ThermalModel& thermal,
                              const std::vector<double>& nu_grid,
                              bool closed_form) {
  NoiseSpectrum s;
  s.nu_grid = nu_grid;
  s.total.resize(nu_grid.size());
  s.backaction.resize(nu_grid.size());
  s.shot.resize(nu_grid.size());
  s.thermal.resize(nu_grid.size());
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    try {
      const PsdPoint pt =
          closed_form ? psd_closed_form(c, p, cavity, thermal, nu_grid[i])
                      : psd_numeric(c, p, cavity, thermal, nu_grid[i]);
      s.total[i] = pt.total;
      s.backaction[i] = pt.backaction;
      s.shot[i] = pt.shot;
      s.thermal[i] = pt.thermal;
    } catch (const Error& e) {
      s.total[i] = s.backaction[i] = s.shot[i] =
          std::numeric_limits<double>::quiet_NaN();
      s.thermal[i] = thermal.N_BM;
      s.flags.push_back({i, e.what()});
    }
  }
  return s;
}

std::vector<double> log_grid_rad(double f_min_hz, double f_max_hz,
                                 std::size_t points) {
  if (!(f_min_hz > 0) || !(f_max_hz > f_min_hz) || points < 2)
    throw ConfigError("grid requires 0 < min < max and at least 2 points");
  std::vector<double> nu(points);
  const double a = std::log10(f_min_hz);
  const double b = std::log10(f_max_hz);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) /
                             static_cast<double>(points - 1);
    nu[i] = constants::two_pi * std::pow(10.0, t);
  }
  return nu;
}

void write_spectrum_csv(std::ostream& os, const NoiseSpectrum& s,
                        const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << "\n";
  os << "freq_hz,total,backaction,shot,thermal\n";
  char buf[160];
  for (std::size_t i = 0; i < s.nu_grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "%.12e,%.12e,%.12e,%.12e,%.12e\n",
                  s.nu_grid[i] / constants::two_pi, s.total[i],
                  s.backaction[i], s.shot[i], s.thermal[i]);
    os << buf;
  }
}

}  // namespace qnforce
