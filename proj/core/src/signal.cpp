#include "qnforce/signal.hpp"

#include <cmath>

#include "qnforce/constants.hpp"
#include "qnforce/errors.hpp"

namespace qnforce {

namespace {

using constants::G_newton;
using constants::pi;
using constants::two_pi;

// Ascending series for K1, machine-accurate for x <= 2:
//   K1(x) = ln(x/2) I1(x) + 1/x
//           - (x/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
double bessel_k1_series(double x) {
  const double half = 0.5 * x;
  const double q = half * half;
  const double lg = std::log(half);

  double i1 = 0;  // I1(x) via its own series
  {
    double term = half;  // k = 0: (x/2) / (0! 1!)
    for (int k = 0;; ++k) {
      i1 += term;
      term *= q / (static_cast<double>(k + 1) * (k + 2));
      if (term < 1e-19 * i1) break;
    }
  }

  constexpr double euler_gamma = 0.57721566490153286061;
  double psi_a = -euler_gamma;        // psi(1)
  double psi_b = 1.0 - euler_gamma;   // psi(2)
  double sum = 0;
  double factor = half;  // (x/2) (x^2/4)^k / (k! (k+1)!), k = 0
  for (int k = 0;; ++k) {
    const double term = (psi_a + psi_b) * factor;
    sum += term;
    factor *= q / (static_cast<double>(k + 1) * (k + 2));
    psi_a += 1.0 / (k + 1);
    psi_b += 1.0 / (k + 2);
    if (std::abs(factor * (psi_a + psi_b)) < 1e-19 * std::abs(sum)) break;
    if (k > 60) break;
  }
  return lg * i1 + 1.0 / x - 0.5 * sum;
}

// Steed/Thompson-Barnett continued fraction (CF2) for K0, K1 at x >= 2.
double bessel_k1_cf2(double x) {
  constexpr double eps = 1e-17;
  const double a1 = 0.25;  // 1/4 - mu^2 with mu = 0
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0, q2 = 1.0;
  double a = -a1;
  double q = a1, c = a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 10000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  h = a1 * h;
  const double k0 = std::sqrt(pi / (2.0 * x)) * std::exp(-x) / s;
  return k0 * (x + 0.5 - h) / x;
}

}  // namespace

void DmEncounter::validate() const {
  if (!(m_dm >= 0)) throw DomainError("candidate mass must be non-negative");
  if (!(b > 0) || !(v > 0) || !(m > 0))
    throw DomainError("encounter geometry must be strictly positive");
}

double dm_force_time(const DmEncounter& e, double t) {
  const double r2 = e.b * e.b + e.v * e.v * t * t;
  return G_newton * e.m * e.m_dm * e.b / (r2 * std::sqrt(r2));
}

double bessel_k1(double x) {
  if (!(x > 0)) throw DomainError("bessel_k1 requires x > 0");
  if (x <= 2.0) return bessel_k1_series(x);
  const double v = bessel_k1_cf2(x);
  return std::isfinite(v) ? v : 0.0;  // underflow far in the tail
}

double dm_force_freq(const DmEncounter& e, double nu, SignalForm form) {
  const double absnu = std::abs(nu);
  const double amp = std::sqrt(2.0 / pi) * G_newton * e.m * e.m_dm;
  if (form == SignalForm::Approx)
    return amp / (e.b * e.v) * std::exp(-e.b * absnu / (2.0 * e.v));
  if (absnu == 0.0) return amp / (e.b * e.v);  // x K1(x) -> 1
  return amp * absnu / (e.v * e.v) * bessel_k1(e.b * absnu / e.v);
}

SnrResult snr_opt(const DmEncounter& e,
                  const std::function<double(double)>& psd,
                  const SnrOptions& opt) {
  e.validate();
  SnrResult out;
  out.nu_min = opt.nu_min > 0 ? opt.nu_min : two_pi * 0.1;
  out.nu_max = opt.nu_max > 0 ? opt.nu_max : 40.0 * e.v / e.b;
  if (!(out.nu_max > out.nu_min))
    throw DomainError("SNR integration window is empty");
  if (e.m_dm == 0) return out;

  const auto integrand = [&](double nu) {
    const double f = dm_force_freq(e, nu, opt.form);
    const double s = psd(nu);
    if (!(s > 0) || !std::isfinite(s))
      throw DomainError("PSD must be strictly positive on the SNR domain");
    return f * f / s;
  };

  QuadratureOptions qopt;
  qopt.rel_tol = opt.rel_tol;
  const auto r = integrate_log_adaptive(integrand, out.nu_min, out.nu_max,
                                        qopt);
  out.snr_sq = r.value;
  out.quadrature_error =
      r.value != 0 ? r.error_estimate / std::abs(r.value) : 0.0;
  out.evaluations = r.evaluations;
  if (!r.converged)
    throw AccuracyError("SNR quadrature did not reach requested tolerance",
                        r.value, out.quadrature_error);
  return out;
}

SqlBenchmark sql_benchmark(double sensor_mass, double tau, double peak_force) {
  if (!(sensor_mass > 0) || !(tau > 0))
    throw DomainError("sql_benchmark requires positive mass and timescale");
  SqlBenchmark b;
  b.delta_f = std::sqrt(constants::hbar * sensor_mass / (tau * tau * tau));
  b.ratio_sq = (peak_force / b.delta_f) * (peak_force / b.delta_f);
  return b;
}

}  // namespace qnforce
