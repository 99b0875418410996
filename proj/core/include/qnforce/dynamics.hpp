#pragma once

#include <array>
#include <complex>
#include <vector>

#include "qnforce/cases.hpp"
#include "qnforce/linalg.hpp"
#include "qnforce/params.hpp"

namespace qnforce {

// Fixed operator ordering of the linearized dynamics:
//   Z = {x, p, Phi, Q, X, Y}
// with input vector Z_in = {0, F_in, 0, 0, -sqrt(kappa) X_in,
// -sqrt(kappa) Y_in}.
struct InputMap {
  static constexpr int force_row = 1;  // p row (0-based)
  static constexpr int x_in_row = 4;
  static constexpr int y_in_row = 5;
};

// Real 6x6 drift matrix of one detector/readout/gauge combination.
struct SystemMatrix {
  DetectorCase detector;
  std::array<std::array<double, 6>, 6> entries{};
};

SystemMatrix build_system_matrix(const DetectorCase& c,
                                 const DetectorParams& p,
                                 const CavityParams& cavity);

// Output-quadrature coefficients: Y_out = r Y_in + x_coeff X_in + c_F F_in.
struct OutputCoefficients {
  std::complex<double> r;        // Y_in coefficient (unimodular at Delta = 0)
  std::complex<double> x_coeff;  // X_in coefficient (raw backaction path)
  std::complex<double> c_F;      // F_in coefficient, 1/N units
};

// Frequency-domain solution at one angular frequency.
struct TransferSolution {
  double nu = 0;
  ComplexMatrix<double> resolvent;  // (i nu I - M)^(-1)
  OutputCoefficients raw;
  std::complex<double> beta;   // x_coeff / c_F, force-normalized backaction
  std::complex<double> gamma;  // r / c_F, force-normalized shot
  double condition = 0;        // 1-norm condition estimate of (i nu I - M)
  double residual_inf = 0;     // || (i nu I - M) R - I ||_inf, measured on
                               // the unit-balanced system (raw SI rows and
                               // columns carry different units)
  bool flagged = false;        // condition beyond the trust threshold
  bool non_oracle = false;     // Delta != 0: no closed form applies
};

// Full resolvent solve with estimator normalization.  Throws
// ZeroSignalError when the force path vanishes identically (G = 0 or the
// frequency kills the signal coefficient exactly).
TransferSolution estimator_coefficients(const DetectorCase& c,
                                        const DetectorParams& p,
                                        const CavityParams& cavity, double nu);

// Raw output coefficients without the estimator normalization; valid for
// G = 0 as well.
TransferSolution solve_output(const DetectorCase& c, const DetectorParams& p,
                              const CavityParams& cavity, double nu);

// Analytic output coefficients at zero detuning, one closed form per
// detector/readout combination (gauge-independent).
OutputCoefficients y_out_closed_form(const DetectorCase& c,
                                     const DetectorParams& p,
                                     const CavityParams& cavity, double nu);

// Positive real frequencies at which the linear response or the force
// estimator is singular (normal modes of the undamped mechanics+circuit
// block and, for the electromechanical voltage readout, the zero of the
// signal coefficient).  Used to mask grid points in oracle comparisons.
std::vector<double> real_pole_frequencies(const DetectorCase& c,
                                          const DetectorParams& p,
                                          const CavityParams& cavity);

// Angular frequency at which the backaction coefficient vanishes exactly
// (the root of the printed numerator for the case).
double backaction_zero(const DetectorCase& c, const DetectorParams& p,
                       const CavityParams& cavity);

// True when nu lies within `rel` relative distance of any entry of `poles`.
bool near_any_pole(double nu, const std::vector<double>& poles,
                   double rel = 1e-3);

}  // namespace qnforce
