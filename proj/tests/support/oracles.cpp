#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qnforce/constants.hpp"

namespace qnforce::testing {

double bessel_kn_oracle(int order, double x) {
  // Integrand decays like exp(-x cosh t); stop once it underflows.
  const double h = 1.0 / 64.0;
  double sum = 0.5 * std::exp(-x);  // t = 0 term, cosh(0) = 1, weight 1/2
  for (int i = 1;; ++i) {
    const double t = i * h;
    const double c = std::cosh(t);
    const double e = x * c;
    if (e > 745.0) break;
    sum += std::exp(-e) * std::cosh(order * t);
    if (t > 40.0) break;
  }
  return sum * h;
}

GridMinimum grid_minimize_potential(const ElectroMechParams& p, double q_lo,
                                    double q_hi, double x_lo, double x_hi,
                                    int points_per_axis, int refinements) {
  GridMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass <= refinements; ++pass) {
    const double dq = (q_hi - q_lo) / (points_per_axis - 1);
    const double dx = (x_hi - x_lo) / (points_per_axis - 1);
    GridMinimum local;
    local.value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points_per_axis; ++i) {
      const double q = q_lo + i * dq;
      for (int j = 0; j < points_per_axis; ++j) {
        const double x = x_lo + j * dx;
        if (!(x < p.d0)) continue;
        const double v = em_potential(p, q, x);
        if (v < local.value) {
          local.value = v;
          local.Q = q;
          local.x = x;
        }
      }
    }
    local.resolution_Q = dq;
    local.resolution_x = dx;
    best = local;
    // Zoom in around the current minimum for the next pass.
    q_lo = local.Q - 2.0 * dq;
    q_hi = local.Q + 2.0 * dq;
    x_lo = local.x - 2.0 * dx;
    x_hi = std::min(local.x + 2.0 * dx, 0.999 * p.d0);
  }
  return best;
}

double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double rel_tol) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > rel_tol * (std::abs(a) + std::abs(b))) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

void fft_radix2(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * constants::pi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

MagnetoMechParams reference_mm_params() {
  using constants::two_pi;
  MagnetoMechParams p;
  p.m = 1e-3;
  p.k = p.m * (two_pi * 10.0) * (two_pi * 10.0);
  p.T_v = 2.0;
  p.L = 1e-5;
  p.C_L = 1.0 / (p.L * (two_pi * 1e7) * (two_pi * 1e7));
  p.L_M = 1e-9;
  return p;
}

ReducedElectroMechParams reference_em_params() {
  using constants::two_pi;
  ReducedElectroMechParams p;
  p.m = 1e-3;
  p.k_eff = p.m * (two_pi * 10.0) * (two_pi * 10.0);
  p.T_x = -1e-10;
  p.C_x0 = 2.53e-9;
  p.C_P = 25e-15;
  p.L = 1e-5;
  p.L_M = 1e-9;
  return p;
}

CavityParams reference_cavity() {
  CavityParams c;
  c.kappa = constants::two_pi * 1e6;
  return c;
}

}  // namespace qnforce::testing
