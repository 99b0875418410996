#include "qnforce/params.hpp"

#include <cmath>
#include <limits>

namespace qnforce {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0) || !std::isfinite(v))
    throw ConfigError(std::string(name) + " must be strictly positive");
}

const MagnetoMechParams& as_mm(const DetectorParams& p) {
  if (const auto* mm = std::get_if<MagnetoMechParams>(&p)) return *mm;
  throw ConfigError("magnetomechanical case requires voice-coil parameters");
}

const ReducedElectroMechParams& as_em(const DetectorParams& p) {
  if (const auto* em = std::get_if<ReducedElectroMechParams>(&p)) return *em;
  throw ConfigError(
      "electromechanical case requires capacitive-transducer parameters");
}

void require_readout_inductor(const std::optional<double>& L_M) {
  if (!L_M)
    throw ConfigError("current readout requires the readout inductance l_m");
}

}  // namespace

void MagnetoMechParams::validate() const {
  require_positive(m, "mass");
  require_positive(k, "spring constant");
  if (!(T_v >= 0) || !std::isfinite(T_v))
    throw ConfigError("T_v must be finite and non-negative");
  require_positive(L, "inductance");
  require_positive(C_L, "C_L");
  if (L_M) {
    require_positive(*L_M, "L_M");
    if (!(*L_M < L))
      throw ConfigError("L_M must be smaller than L (low-impedance readout)");
  }
}

double MagnetoMechParams::omega_m() const { return std::sqrt(k / m); }

void ElectroMechParams::validate() const {
  require_positive(m, "mass");
  require_positive(k, "spring constant");
  require_positive(A, "plate area");
  require_positive(d0, "plate gap");
  require_positive(C_P, "C_P");
  require_positive(L, "inductance");
  if (!(V_DC >= 0) || !std::isfinite(V_DC))
    throw ConfigError("V_DC must be finite and non-negative");
  if (L_M) {
    require_positive(*L_M, "L_M");
    if (!(*L_M < L))
      throw ConfigError("L_M must be smaller than L (low-impedance readout)");
  }
}

void ReducedElectroMechParams::validate() const {
  require_positive(m, "mass");
  require_positive(k_eff, "effective spring constant");
  require_positive(C_x0, "C_x0");
  require_positive(C_P, "C_P");
  require_positive(L, "inductance");
  if (!std::isfinite(T_x)) throw ConfigError("T_x must be finite");
  if (L_M) {
    require_positive(*L_M, "L_M");
    if (!(*L_M < L))
      throw ConfigError("L_M must be smaller than L (low-impedance readout)");
  }
}

double ReducedElectroMechParams::omega_m() const {
  return std::sqrt(k_eff / m);
}

void CavityParams::validate() const {
  require_positive(kappa, "kappa");
  if (!std::isfinite(Delta)) throw ConfigError("detuning must be finite");
  if (!std::isfinite(G) || !std::isfinite(G_x))
    throw ConfigError("couplings must be finite");
}

DerivedFrequencies derived_frequencies(const DetectorCase& c,
                                       const DetectorParams& p) {
  DerivedFrequencies f;
  if (c.magnetomechanical()) {
    const auto& mm = as_mm(p);
    mm.validate();
    f.omega_m = std::sqrt(mm.k / mm.m);
    f.omega_c = 1.0 / std::sqrt(mm.L * mm.C_L);
    f.delta = std::sqrt(mm.T_v * mm.T_v / (mm.m * mm.L));
    if (c.current_readout()) require_readout_inductor(mm.L_M);
    if (mm.L_M) f.omega_l = 1.0 / std::sqrt(*mm.L_M * mm.C_L);
  } else {
    const auto& em = as_em(p);
    em.validate();
    const double c_eff = em.C_eff();
    f.omega_m = std::sqrt(em.k_eff / em.m);
    f.omega_c = 1.0 / std::sqrt(em.L * c_eff);
    f.delta = std::sqrt(c_eff * em.T_x * em.T_x / (em.m * em.C_P * em.C_P));
    if (c.current_readout()) require_readout_inductor(em.L_M);
    if (em.L_M) f.omega_l = 1.0 / std::sqrt(*em.L_M * c_eff);
  }
  return f;
}

Susceptibilities susceptibilities(const DetectorCase& c,
                                  const DetectorParams& p,
                                  const CavityParams& cavity, double nu) {
  const auto f = derived_frequencies(c, p);
  const double nu2 = nu * nu;
  const double w_m2 = f.omega_m * f.omega_m;
  const double w_c2 = f.omega_c * f.omega_c;
  const double w_l2 = f.omega_l * f.omega_l;
  const double d2 = f.delta * f.delta;

  Susceptibilities s;
  s.chi_kappa = -std::sqrt(cavity.kappa) /
                std::complex<double>(cavity.kappa / 2.0, nu);

  const double den_m = nu2 - w_m2;
  const double den_mp = nu2 - w_m2 - d2;
  s.chi_m = -1.0 / den_m;
  s.chi_m_prime = -1.0 / den_mp;

  double den_lc = 0;
  switch (c.kind) {
    case CaseKind::MmVoltage:
      // nu^2 - w_c^2 - delta_v^2 (1 - chi_m w_m^2)
      den_lc = nu2 - w_c2 - d2 * (1.0 - s.chi_m * w_m2);
      break;
    case CaseKind::MmCurrent:
      den_lc = nu2 - w_c2 - w_l2 + d2 * w_c2 * s.chi_m_prime;
      break;
    case CaseKind::EmVoltage:
      den_lc = nu2 - w_c2 + d2 * w_c2 * s.chi_m;
      break;
    case CaseKind::EmCurrent:
      den_lc = nu2 - w_c2 - w_l2 + d2 * (w_c2 + w_l2) * s.chi_m;
      break;
  }
  s.chi_lc = -1.0 / den_lc;

  if (!std::isfinite(s.chi_m) || !std::isfinite(s.chi_m_prime) ||
      !std::isfinite(s.chi_lc))
    throw PoleSingularityError("susceptibility evaluated at a real pole");
  return s;
}

double transducer_constant_v(double turns, double coil_radius,
                             double radial_field) {
  if (turns < 0) throw DomainError("turn count must be non-negative");
  if (!(coil_radius > 0)) throw DomainError("coil radius must be positive");
  return constants::two_pi * turns * coil_radius * radial_field;
}

double capacitance_at(double x, double area, double d0) {
  if (!(x < d0))
    throw PlateContactError("plate displacement reaches the fixed plate");
  return constants::eps0 * area / (d0 - x);
}

double em_potential(const ElectroMechParams& p, double Q, double x) {
  const double c = capacitance_at(x, p.A, p.d0);
  const double num =
      Q * Q + 2.0 * c * p.V_DC * Q - p.C_P * c * p.V_DC * p.V_DC;
  return 0.5 * p.k * x * x + num / (2.0 * (c + p.C_P));
}

void em_gradient(const ElectroMechParams& p, double Q, double x, double* dQ,
                 double* dx) {
  const double c = capacitance_at(x, p.A, p.d0);
  const double ceff = c + p.C_P;
  *dQ = (Q + c * p.V_DC) / ceff;
  const double branch = Q - p.C_P * p.V_DC;
  // kx minus electrostatic attraction (Q_C^b)^2 / (2 eps0 A)
  *dx = p.k * x -
        branch * branch * c * c /
            (2.0 * constants::eps0 * p.A * ceff * ceff);
}

void em_hessian(const ElectroMechParams& p, double Q, double x,
                std::array<std::array<double, 2>, 2>* h) {
  const double c = capacitance_at(x, p.A, p.d0);
  const double ceff = c + p.C_P;
  const double cprime = c * c / (constants::eps0 * p.A);
  const double branch = Q - p.C_P * p.V_DC;
  (*h)[0][0] = 1.0 / ceff;
  (*h)[0][1] = (*h)[1][0] = -cprime * branch / (ceff * ceff);
  (*h)[1][1] =
      p.k - branch * branch * c * cprime * p.C_P /
                (constants::eps0 * p.A * ceff * ceff * ceff);
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  EquilibriumPoint point;
};

constexpr double kGradTolerance = 1e-12;
constexpr int kMaxNewtonIterations = 200;

// Damped Newton on grad V = 0 with step halving until V decreases.  The
// potential is exactly quadratic in Q, so the charge direction converges in
// one step; all the work is in x.
NewtonOutcome newton_minimize(const ElectroMechParams& p, double Q, double x) {
  NewtonOutcome out;
  double v = em_potential(p, Q, x);
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    double gq, gx;
    em_gradient(p, Q, x, &gq, &gx);
    const double gnorm = std::hypot(gq, gx);
    if (gnorm <= kGradTolerance) {
      out.converged = true;
      out.point.Q0 = Q;
      out.point.x0 = x;
      out.point.V_min = v;
      out.point.residual = gnorm;
      out.point.iterations = it;
      em_hessian(p, Q, x, &out.point.hessian);
      return out;
    }
    std::array<std::array<double, 2>, 2> h;
    em_hessian(p, Q, x, &h);
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if (det == 0 || !std::isfinite(det)) return out;
    double dq = -(h[1][1] * gq - h[0][1] * gx) / det;
    double dx = -(h[0][0] * gx - h[1][0] * gq) / det;
    // Newton direction may point uphill near the saddle; fall back on a
    // plain descent step then.
    if (dq * gq + dx * gx > 0) {
      dq = -gq;
      dx = -gx;
    }
    bool stepped = false;
    for (int half = 0; half < 60; ++half) {
      const double qn = Q + dq;
      double xn = x + dx;
      if (xn < p.d0) {
        double vn;
        try {
          vn = em_potential(p, qn, xn);
        } catch (const PlateContactError&) {
          vn = std::numeric_limits<double>::infinity();
        }
        // Accept on energy decrease, or on gradient decrease once the
        // predicted energy gain falls below the resolution of V.
        bool accept = vn < v;
        if (!accept && std::isfinite(vn)) {
          double gqn, gxn;
          em_gradient(p, qn, xn, &gqn, &gxn);
          accept = std::hypot(gqn, gxn) < 0.9 * gnorm;
        }
        if (accept) {
          Q = qn;
          x = xn;
          v = vn;
          stepped = true;
          break;
        }
      }
      dq *= 0.5;
      dx *= 0.5;
    }
    if (!stepped) return out;
  }
  return out;
}

bool positive_definite(const std::array<std::array<double, 2>, 2>& h) {
  return h[0][0] > 0 && h[0][0] * h[1][1] - h[0][1] * h[1][0] > 0;
}

}  // namespace

EquilibriumPoint find_equilibrium(const ElectroMechParams& p) {
  p.validate();
  if (p.V_DC == 0) {
    EquilibriumPoint eq;
    eq.V_min = 0;
    em_hessian(p, 0, 0, &eq.hessian);
    return eq;
  }

  // Continuation in bias from zero: pull-in shows up as a stage that either
  // fails to converge or converges to a non-positive-definite point.
  const int stages = 16;
  double Q = 0, x = 0;
  EquilibriumPoint last;
  for (int s = 1; s <= stages; ++s) {
    ElectroMechParams stage = p;
    stage.V_DC = p.V_DC * static_cast<double>(s) / stages;
    if (s == 1) {
      const double c0 = capacitance_at(0, p.A, p.d0);
      const double series = c0 * p.C_P / (c0 + p.C_P);
      Q = (series + c0) * stage.V_DC;  // charge scale of the biased circuit
      x = 0;
    }
    const auto out = newton_minimize(stage, Q, x);
    if (!out.converged || !positive_definite(out.point.hessian)) {
      if (s == 1 && !out.converged)
        throw SolverError("equilibrium search did not converge");
      throw UnstableBiasError(
          "no stable operating point: bias beyond pull-in");
    }
    Q = out.point.Q0;
    x = out.point.x0;
    last = out.point;
  }
  // Pull-in also manifests as a softened spring; reject k_eff <= 0.
  const auto tx = transducer_constant_x(p, last);
  if (!(tx.k_eff > 0))
    throw UnstableBiasError("effective spring constant non-positive at bias");
  return last;
}

TransducerX transducer_constant_x(const ElectroMechParams& p,
                                  const EquilibriumPoint& eq) {
  const double c = capacitance_at(eq.x0, p.A, p.d0);
  const double c_eff = c + p.C_P;
  TransducerX t;
  t.C_eff = c_eff;
  t.T_x = p.C_P * (eq.Q0 - p.C_P * p.V_DC) / (constants::eps0 * p.A) *
          (c / c_eff) * (c / c_eff);
  t.k_eff = p.k - c_eff * t.T_x * t.T_x / (c * p.C_P);
  return t;
}

ReducedElectroMechParams reduce(const ElectroMechParams& p,
                                const EquilibriumPoint& eq) {
  const auto t = transducer_constant_x(p, eq);
  ReducedElectroMechParams r;
  r.m = p.m;
  r.k_eff = t.k_eff;
  r.T_x = t.T_x;
  r.C_x0 = capacitance_at(eq.x0, p.A, p.d0);
  r.C_P = p.C_P;
  r.L = p.L;
  r.L_M = p.L_M;
  return r;
}

}  // namespace qnforce
