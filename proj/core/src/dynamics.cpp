#include "qnforce/dynamics.hpp"

#include <cmath>

#include "qnforce/constants.hpp"

namespace qnforce {

namespace {

using constants::hbar;
using CLD = std::complex<long double>;

const MagnetoMechParams& as_mm(const DetectorParams& p) {
  if (const auto* mm = std::get_if<MagnetoMechParams>(&p)) return *mm;
  throw ConfigError("magnetomechanical case requires voice-coil parameters");
}

const ReducedElectroMechParams& as_em(const DetectorParams& p) {
  if (const auto* em = std::get_if<ReducedElectroMechParams>(&p)) return *em;
  throw ConfigError(
      "electromechanical case requires capacitive-transducer parameters");
}

// Stable roots of u^2 - s u + q = 0 (coupled-mode frequencies squared).
std::pair<double, double> quadratic_roots(double s, double q) {
  const double disc = s * s - 4.0 * q;
  if (disc < 0) return {0.0, 0.0};
  const double r1 = 0.5 * (s + std::sqrt(disc));
  const double r2 = (r1 != 0.0) ? q / r1 : 0.0;
  return {r1, r2};
}

// Diagonal balancing by powers of two (similarity transform), so the
// frequency solve is well-scaled despite the SI unit spread of the entries.
std::array<long double, 6> balance_scales(
    const std::array<std::array<double, 6>, 6>& m) {
  std::array<long double, 6> s;
  s.fill(1.0L);
  for (int sweep = 0; sweep < 8; ++sweep) {
    bool changed = false;
    for (int i = 0; i < 6; ++i) {
      long double row = 0, col = 0;
      for (int j = 0; j < 6; ++j) {
        if (j == i) continue;
        row += std::abs(static_cast<long double>(m[i][j])) * s[j] / s[i];
        col += std::abs(static_cast<long double>(m[j][i])) * s[i] / s[j];
      }
      if (row == 0 || col == 0) continue;
      long double f = 1.0L;
      while (col * f * f < row * 0.5L) f *= 2.0L;
      while (col * f * f > row * 2.0L) f *= 0.5L;
      if (f != 1.0L) {
        s[i] *= f;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return s;
}

}  // namespace

namespace {

// Entry assembly shared by the printed-matrix contract (double) and the
// frequency solver (quad precision).  The convenience constants k', k_M',
// 1/C_L', 1/L' involve additions spanning up to twelve orders of magnitude;
// composing them in the solver's scalar type keeps the two gauges exact
// functions of the same primitive parameters.
template <typename R>
void fill_entries(const DetectorCase& c, const DetectorParams& p,
                  const CavityParams& cavity,
                  std::array<std::array<R, 6>, 6>& e) {
  cavity.validate();
  for (auto& row : e) row.fill(R(0));
  const R G = R(cavity.G);
  const R kappa = R(cavity.kappa);
  const R Delta = R(cavity.Delta);
  const R hb = R(hbar);

  if (cavity.G_x != 0 && c.kind != CaseKind::EmVoltage)
    throw ConfigError(
        "direct position coupling G_x applies to em-voltage only");

  // Cavity block is common to all cases.
  e[4][4] = -kappa / R(2);
  e[4][5] = -Delta;
  e[5][4] = Delta;
  e[5][5] = -kappa / R(2);

  if (c.magnetomechanical()) {
    const auto& mm = as_mm(p);
    mm.validate();
    const R m = R(mm.m), k = R(mm.k), Tv = R(mm.T_v), L = R(mm.L),
            CL = R(mm.C_L);
    const R inv_CLp = R(1) / CL + Tv * Tv / m;  // 1/C_L'
    const R kp = k + Tv * Tv / L;               // k'
    if (c.kind == CaseKind::MmVoltage) {
      if (c.gauge == 1) {
        e[0][1] = R(1) / m;
        e[0][3] = -Tv / m;
        e[1][0] = -k;
        e[2][1] = -Tv / m;
        e[2][3] = inv_CLp;
        e[2][4] = -hb * G;
        e[3][2] = -R(1) / L;
        e[5][3] = G;
      } else {
        e[0][1] = R(1) / m;
        e[1][0] = -kp;
        e[1][2] = Tv / L;
        e[2][3] = R(1) / CL;
        e[2][4] = -hb * G;
        e[3][0] = Tv / L;
        e[3][2] = -R(1) / L;
        e[5][3] = G;
      }
    } else {  // MmCurrent
      if (!mm.L_M)
        throw ConfigError("current readout requires the readout inductance");
      const R LM = R(*mm.L_M);
      const R kpM = k + Tv * Tv / LM;        // k_M'
      const R inv_Lp = R(1) / L + R(1) / LM;  // 1/L'
      if (c.gauge == 1) {
        e[0][1] = R(1) / m;
        e[0][3] = -Tv / m;
        e[1][0] = -kpM;
        e[1][2] = -Tv / LM;
        e[1][4] = hb * G * Tv;
        e[2][1] = -Tv / m;
        e[2][3] = inv_CLp;
        e[3][0] = -Tv / LM;
        e[3][2] = -inv_Lp;
        e[3][4] = hb * G;
        e[5][0] = G * Tv;
        e[5][2] = G;
      } else {
        e[0][1] = R(1) / m;
        e[1][0] = -kp;
        e[1][2] = Tv / L;
        e[2][3] = R(1) / CL;
        e[3][0] = Tv / L;
        e[3][2] = -inv_Lp;
        e[3][4] = hb * G;
        e[5][2] = G;
      }
    }
  } else {
    const auto& em = as_em(p);
    em.validate();
    const R m = R(em.m), keff = R(em.k_eff), Tx = R(em.T_x), CP = R(em.C_P);
    const R Ceff = R(em.C_x0) + CP;
    const R L = R(em.L);
    if (c.kind == CaseKind::EmVoltage) {
      const R Gx = R(cavity.G_x);
      e[0][1] = R(1) / m;
      e[1][0] = -keff;
      e[1][3] = Tx / CP;
      e[1][4] = -hb * Gx;
      e[2][0] = -Tx / CP;
      e[2][3] = R(1) / Ceff;
      e[2][4] = hb * G;
      e[3][2] = -R(1) / L;
      e[5][0] = -Gx;
      e[5][3] = -G;
    } else {  // EmCurrent
      if (!em.L_M)
        throw ConfigError("current readout requires the readout inductance");
      const R inv_Lp = R(1) / L + R(1) / R(*em.L_M);
      e[0][1] = R(1) / m;
      e[1][0] = -keff;
      e[1][3] = Tx / CP;
      e[2][0] = -Tx / CP;
      e[2][3] = R(1) / Ceff;
      e[3][2] = -inv_Lp;
      e[3][4] = -hb * G;
      e[5][2] = -G;
    }
  }
}

}  // namespace

SystemMatrix build_system_matrix(const DetectorCase& c,
                                 const DetectorParams& p,
                                 const CavityParams& cavity) {
  SystemMatrix sm;
  sm.detector = c;
  fill_entries<double>(c, p, cavity, sm.entries);
  return sm;
}

TransferSolution solve_output(const DetectorCase& c, const DetectorParams& p,
                              const CavityParams& cavity, double nu) {
  // Drift entries composed in quad precision: the gauge-2 convenience
  // constants add terms twelve orders apart, and the gauge-invariance
  // contract cannot absorb the pole shift that double rounding causes.
  std::array<std::array<__float128, 6>, 6> mq;
  fill_entries<__float128>(c, p, cavity, mq);

  std::array<std::array<double, 6>, 6> md;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) md[i][j] = static_cast<double>(mq[i][j]);
  const auto scale = balance_scales(md);

  // A = i nu I - M in balanced coordinates.  Balancing is a diagonal
  // similarity by powers of two (exact in floating point), so the i nu I
  // structure survives and the infinity norm becomes meaningful (the raw SI
  // entries mix units).  The LU preconditioner runs in extended precision;
  // iterative refinement against the quad-composed system then removes both
  // solve and composition error.
  using QC = std::complex<__float128>;
  std::array<std::array<QC, 6>, 6> aq;
  ComplexMatrix<long double> a(6, 6);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      const __float128 v = -mq[i][j] *
                           static_cast<__float128>(scale[j] / scale[i]);
      aq[i][j] = QC(v, __float128(0));
      a(i, j) = CLD(static_cast<long double>(v), 0.0L);
    }
    aq[i][i] += QC(__float128(0), static_cast<__float128>(nu));
    a(i, i) += CLD(0.0L, static_cast<long double>(nu));
  }

  const auto lu = lu_factor(a);
  auto x = lu_solve(lu, ComplexMatrix<long double>::identity(6));
  const auto inv_for_cond = x;
  const double condition = static_cast<double>(one_norm(a)) *
                           static_cast<double>(one_norm(inv_for_cond));

  std::array<std::array<QC, 6>, 6> xq;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      xq[i][j] = QC(static_cast<__float128>(x(i, j).real()),
                    static_cast<__float128>(x(i, j).imag()));

  long double residual = 0;
  for (int pass = 0; pass < 3; ++pass) {
    ComplexMatrix<long double> resid(6, 6);
    long double worst = 0;
    for (int i = 0; i < 6; ++i) {
      long double rowsum = 0;
      for (int j = 0; j < 6; ++j) {
        QC acc((i == j) ? __float128(1) : __float128(0), __float128(0));
        for (int k = 0; k < 6; ++k) acc -= aq[i][k] * xq[k][j];
        resid(i, j) = CLD(static_cast<long double>(acc.real()),
                          static_cast<long double>(acc.imag()));
        rowsum += std::abs(resid(i, j));
      }
      worst = std::max(worst, rowsum);
    }
    residual = worst;
    if (pass == 2 || worst == 0) break;
    const auto delta = lu_solve(lu, resid);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        xq[i][j] += QC(static_cast<__float128>(delta(i, j).real()),
                       static_cast<__float128>(delta(i, j).imag()));
  }

  TransferSolution sol;
  sol.nu = nu;
  sol.condition = condition;
  sol.flagged = condition > 1e12;
  sol.non_oracle = cavity.Delta != 0.0;
  sol.residual_inf = static_cast<double>(residual);

  // Undo the balancing: R = S Rb S^-1.
  std::array<std::array<QC, 6>, 6> rq;
  ComplexMatrix<long double> r(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      rq[i][j] = xq[i][j] * static_cast<__float128>(scale[i] / scale[j]);
      r(i, j) = CLD(static_cast<long double>(rq[i][j].real()),
                    static_cast<long double>(rq[i][j].imag()));
    }

  sol.resolvent = ComplexMatrix<double>(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      sol.resolvent(i, j) =
          std::complex<double>(static_cast<double>(r(i, j).real()),
                               static_cast<double>(r(i, j).imag()));

  const __float128 sqrt_kappa = static_cast<__float128>(
      std::sqrt(static_cast<long double>(cavity.kappa)));
  const __float128 kq = static_cast<__float128>(cavity.kappa);
  const QC r_yy = rq[5][InputMap::y_in_row];
  const QC r_yx = rq[5][InputMap::x_in_row];
  const QC r_yf = rq[5][InputMap::force_row];
  const QC y_in_coeff = QC(__float128(1), __float128(0)) - kq * r_yy;
  const QC x_in_coeff = -kq * r_yx;
  const QC f_coeff = sqrt_kappa * r_yf;

  auto narrow = [](QC z) {
    return std::complex<double>(static_cast<double>(z.real()),
                                static_cast<double>(z.imag()));
  };
  sol.raw.r = narrow(y_in_coeff);
  sol.raw.x_coeff = narrow(x_in_coeff);
  sol.raw.c_F = narrow(f_coeff);
  if (sol.raw.c_F != std::complex<double>(0.0, 0.0)) {
    sol.beta = narrow(x_in_coeff / f_coeff);
    sol.gamma = narrow(y_in_coeff / f_coeff);
  }
  return sol;
}

TransferSolution estimator_coefficients(const DetectorCase& c,
                                        const DetectorParams& p,
                                        const CavityParams& cavity,
                                        double nu) {
  auto sol = solve_output(c, p, cavity, nu);
  if (sol.raw.c_F == std::complex<double>(0.0, 0.0))
    throw ZeroSignalError("force estimator undefined: no signal path");
  if (!std::isfinite(sol.raw.c_F.real()) || !std::isfinite(sol.raw.c_F.imag()))
    throw PoleSingularityError("frequency solve at a real pole");
  return sol;
}

OutputCoefficients y_out_closed_form(const DetectorCase& c,
                                     const DetectorParams& p,
                                     const CavityParams& cavity, double nu) {
  cavity.validate();
  if (cavity.Delta != 0.0)
    throw DomainError("closed-form output coefficients require zero detuning");

  const auto f = derived_frequencies(c, p);
  const double kappa = cavity.kappa;
  const std::complex<double> cp(kappa / 2.0, nu);
  const double nu2 = nu * nu;
  const double w_m2 = f.omega_m * f.omega_m;
  const double w_c2 = f.omega_c * f.omega_c;
  const double w_l2 = f.omega_l * f.omega_l;
  const double d2 = f.delta * f.delta;
  const std::complex<double> i_unit(0.0, 1.0);

  OutputCoefficients out;
  out.r = -std::complex<double>(kappa / 2.0, -nu) / cp;

  switch (c.kind) {
    case CaseKind::MmVoltage: {
      const auto& mm = as_mm(p);
      const double G = cavity.G;
      const double den = (nu2 - w_c2) * (nu2 - w_m2) - d2 * nu2;
      out.x_coeff =
          hbar * G * G * kappa * (nu2 - w_m2) / (mm.L * cp * cp * den);
      out.c_F = i_unit * G * std::sqrt(kappa) * f.delta * nu /
                (std::sqrt(mm.m * mm.L) * cp * den);
      break;
    }
    case CaseKind::MmCurrent: {
      const auto& mm = as_mm(p);
      const double G = cavity.G;
      const double den =
          (nu2 - w_m2 - d2) * (nu2 - w_c2 - w_l2) - d2 * w_c2;
      out.x_coeff = hbar * G * G * kappa * mm.L * w_c2 *
                    (nu2 - w_m2 - d2) / (cp * cp * den);
      out.c_F = G * std::sqrt(kappa * mm.L) * f.delta * w_c2 /
                (std::sqrt(mm.m) * cp * den);
      break;
    }
    case CaseKind::EmVoltage: {
      const auto& em = as_em(p);
      const double GQ = cavity.G;
      const double Gx = cavity.G_x;
      const double tx_cp = em.T_x / em.C_P;  // signed; equals
                                             // sgn(T_x) sqrt(mL) delta_x w_ce
      const double den = (nu2 - w_c2) * (nu2 - w_m2) - d2 * w_c2;
      const double num_x = GQ * GQ * em.m * (nu2 - w_m2) -
                           2.0 * GQ * Gx * tx_cp +
                           Gx * Gx * em.L * (nu2 - w_c2);
      out.x_coeff = hbar * kappa * num_x / (em.m * em.L * cp * cp * den);
      const double num_f = Gx * em.L * (nu2 - w_c2) - GQ * tx_cp;
      out.c_F =
          std::sqrt(kappa) * num_f / (em.m * em.L * cp * den);
      break;
    }
    case CaseKind::EmCurrent: {
      const auto& em = as_em(p);
      const double G = cavity.G;
      const double tx_cp = em.T_x / em.C_P;
      const double den =
          (nu2 - w_m2 + d2) * (nu2 - w_c2 - w_l2) - d2 * nu2;
      out.x_coeff = hbar * G * G * kappa * em.L * w_c2 *
                    (nu2 - w_m2 + d2) / (cp * cp * den);
      out.c_F = i_unit * std::sqrt(kappa) * G * tx_cp * nu /
                (em.m * cp * den);
      break;
    }
  }
  if (!std::isfinite(out.x_coeff.real()) || !std::isfinite(out.c_F.real()) ||
      !std::isfinite(out.x_coeff.imag()) || !std::isfinite(out.c_F.imag()))
    throw PoleSingularityError("closed form evaluated at a real pole");
  return out;
}

std::vector<double> real_pole_frequencies(const DetectorCase& c,
                                          const DetectorParams& p,
                                          const CavityParams& cavity) {
  const auto f = derived_frequencies(c, p);
  const double w_m2 = f.omega_m * f.omega_m;
  const double w_c2 = f.omega_c * f.omega_c;
  const double w_l2 = f.omega_l * f.omega_l;
  const double d2 = f.delta * f.delta;

  std::vector<double> poles;
  auto push = [&poles](double u) {
    if (u > 0 && std::isfinite(u)) poles.push_back(std::sqrt(u));
  };

  double s = 0, q = 0;
  switch (c.kind) {
    case CaseKind::MmVoltage:
      s = w_m2 + w_c2 + d2;
      q = w_m2 * w_c2;
      push(w_m2);
      break;
    case CaseKind::MmCurrent:
      s = w_m2 + w_c2 + w_l2 + d2;
      q = w_m2 * (w_c2 + w_l2) + d2 * w_l2;
      push(w_m2 + d2);  // dressed mechanical pole of chi_m'
      push(w_m2);
      break;
    case CaseKind::EmVoltage: {
      s = w_m2 + w_c2;
      q = (w_m2 - d2) * w_c2;
      push(w_m2);
      // Zero of the signal coefficient: the estimator diverges there.
      if (cavity.G_x != 0 && cavity.G != 0) {
        const auto& em = as_em(p);
        push(w_c2 + cavity.G * (em.T_x / em.C_P) / (cavity.G_x * em.L));
      }
      break;
    }
    case CaseKind::EmCurrent:
      s = w_m2 + w_c2 + w_l2;
      q = (w_m2 - d2) * (w_c2 + w_l2);
      push(w_m2);
      break;
  }
  const auto [r1, r2] = quadratic_roots(s, q);
  push(r1);
  push(r2);
  return poles;
}

double backaction_zero(const DetectorCase& c, const DetectorParams& p,
                       const CavityParams& cavity) {
  if (cavity.G == 0)
    throw ZeroSignalError("backaction zero undefined without a coupling");
  const auto f = derived_frequencies(c, p);
  const double w_m2 = f.omega_m * f.omega_m;
  const double d2 = f.delta * f.delta;
  double u = 0;
  switch (c.kind) {
    case CaseKind::MmVoltage:
      return f.omega_m;
    case CaseKind::MmCurrent:
      u = w_m2 + d2;
      break;
    case CaseKind::EmCurrent:
      u = w_m2 - d2;
      break;
    case CaseKind::EmVoltage: {
      const auto& em = as_em(p);
      const double GQ = cavity.G;
      const double Gx = cavity.G_x;
      const double tx_cp = em.T_x / em.C_P;
      const double w_c2 = f.omega_c * f.omega_c;
      u = (GQ * GQ * em.m * w_m2 + 2.0 * GQ * Gx * tx_cp +
           Gx * Gx * em.L * w_c2) /
          (GQ * GQ * em.m + Gx * Gx * em.L);
      break;
    }
  }
  if (!(u > 0))
    throw DomainError("no real backaction zero for these parameters");
  return std::sqrt(u);
}

bool near_any_pole(double nu, const std::vector<double>& poles, double rel) {
  for (const double p : poles)
    if (std::abs(nu - p) <= rel * p) return true;
  return false;
}

}  // namespace qnforce
