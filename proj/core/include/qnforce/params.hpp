#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "qnforce/cases.hpp"
#include "qnforce/constants.hpp"
#include "qnforce/errors.hpp"

namespace qnforce {

// ---------------------------------------------------------------------------
// Parameter sets
// ---------------------------------------------------------------------------

// Voice-coil detector: magnetic test mass on a spring, pick-up coil of
// inductance L shunted by C_L, optional readout inductor L_M for current
// sensing.  All SI; frequencies are angular internally.
struct MagnetoMechParams {
  double m = 0;     // kg
  double k = 0;     // N/m
  double T_v = 0;   // T*m (= V*s/m), velocity transducer constant
  double L = 0;     // H
  double C_L = 0;   // F
  std::optional<double> L_M;  // H, current readout only; must satisfy L_M < L

  void validate() const;
  double omega_m() const;  // sqrt(k/m)
};

// Mechanically varying parallel-plate capacitor, full description.  The
// movable plate sits at x = 0 with gap d0 when uncharged; biasing shifts the
// operating point, which find_equilibrium locates.
struct ElectroMechParams {
  double m = 0;     // kg
  double k = 0;     // N/m (bare spring)
  double A = 0;     // m^2 plate area
  double d0 = 0;    // m uncharged gap
  double V_DC = 0;  // V bias
  double C_P = 0;   // F parasitic capacitance
  double L = 0;     // H
  std::optional<double> L_M;

  void validate() const;
};

// Linearized electromechanical detector about its operating point.  Allows
// direct entry of a measured T_x and operating-point capacitance without
// knowing the bias and geometry that produced them.
struct ReducedElectroMechParams {
  double m = 0;      // kg
  double k_eff = 0;  // N/m effective spring at the operating point
  double T_x = 0;    // C/m position transducer constant (signed)
  double C_x0 = 0;   // F capacitance at equilibrium, C(x_0)
  double C_P = 0;    // F
  double L = 0;      // H
  std::optional<double> L_M;

  void validate() const;
  double C_eff() const { return C_x0 + C_P; }
  double omega_m() const;  // sqrt(k_eff/m)
};

using DetectorParams =
    std::variant<MagnetoMechParams, ReducedElectroMechParams>;

// Parametric readout cavity.  G is the linearized coupling between the
// cavity amplitude quadrature and the sensed circuit variable: rad/s per C
// for charge sensing, rad/s per Wb for flux sensing.  G_x (rad/s per m) is
// the direct position coupling that only the electromechanical voltage
// readout has.
struct CavityParams {
  double kappa = 0;  // rad/s cavity decay rate
  double Delta = 0;  // rad/s detuning; closed forms require 0
  double G = 0;
  double G_x = 0;
  // Provenance-only record of bare couplings and drive strength; accepted
  // from configuration, never used in any computation.
  std::map<std::string, double> provenance;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Derived quantities
// ---------------------------------------------------------------------------

// Characteristic angular frequencies of a detector configuration.
//   omega_m    mechanical resonance, sqrt(k/m) or sqrt(k_eff/m)
//   omega_c    circuit resonance 1/sqrt(L C_L) (mm) or 1/sqrt(L C_eff) (em)
//   omega_l    readout-loop resonance 1/sqrt(L_M C_L) or 1/sqrt(L_M C_eff);
//              zero when no L_M is configured
//   delta      coupling shift, sqrt(T_v^2/(m L)) or sqrt(C_eff T_x^2/(m C_P^2))
struct DerivedFrequencies {
  double omega_m = 0;
  double omega_c = 0;
  double omega_l = 0;
  double delta = 0;
};

DerivedFrequencies derived_frequencies(const DetectorCase& c,
                                       const DetectorParams& p);

// Linear response functions entering the closed-form noise expressions.
// chi_m and chi_m_prime are the bare and circuit-dressed mechanical
// susceptibilities; chi_lc is the case-appropriate circuit susceptibility.
struct Susceptibilities {
  std::complex<double> chi_kappa;
  double chi_m = 0;
  double chi_m_prime = 0;
  double chi_lc = 0;
};

Susceptibilities susceptibilities(const DetectorCase& c,
                                  const DetectorParams& p,
                                  const CavityParams& cavity, double nu);

// ---------------------------------------------------------------------------
// Transducer constants
// ---------------------------------------------------------------------------

// Induced-voltage constant of an N-turn coil of radius R in a radial field
// B_r: the full wire length times the field.
double transducer_constant_v(double turns, double coil_radius,
                             double radial_field);

// Parallel-plate capacitance at plate displacement x (gap d0 - x).
double capacitance_at(double x, double area, double d0);

// ---------------------------------------------------------------------------
// Electromechanical equilibrium
// ---------------------------------------------------------------------------

struct EquilibriumPoint {
  double Q0 = 0;     // C node charge at the minimum
  double x0 = 0;     // m plate displacement at the minimum
  double V_min = 0;  // J potential value
  std::array<std::array<double, 2>, 2> hessian{};  // d^2V in (Q, x) order
  double residual = 0;  // |grad V| at the returned point
  int iterations = 0;
};

// Charge/position potential of the biased detector circuit; the coupling
// between circuit and mechanics lives entirely in this function.
double em_potential(const ElectroMechParams& p, double Q, double x);
void em_gradient(const ElectroMechParams& p, double Q, double x, double* dQ,
                 double* dx);
void em_hessian(const ElectroMechParams& p, double Q, double x,
                std::array<std::array<double, 2>, 2>* h);

// Damped Newton search for the stable operating point, continued from zero
// bias.  Throws UnstableBiasError past pull-in and SolverError on
// non-convergence.
EquilibriumPoint find_equilibrium(const ElectroMechParams& p);

struct TransducerX {
  double T_x = 0;    // C/m
  double k_eff = 0;  // N/m
  double C_eff = 0;  // F
};

// Position transducer constant and effective circuit/spring constants at a
// given equilibrium.
TransducerX transducer_constant_x(const ElectroMechParams& p,
                                  const EquilibriumPoint& eq);

// Collapse a full electromechanical description to the linearized form used
// by the dynamics.
ReducedElectroMechParams reduce(const ElectroMechParams& p,
                                const EquilibriumPoint& eq);

}  // namespace qnforce
