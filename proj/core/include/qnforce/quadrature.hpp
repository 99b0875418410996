#pragma once

#include <functional>

namespace qnforce {

struct QuadratureResult {
  double value = 0;
  double error_estimate = 0;  // absolute
  bool converged = true;
  long evaluations = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-6;
  int initial_panels_per_decade = 8;
  int max_depth = 48;
};

// Adaptive Simpson quadrature of f over [a, b] after the substitution
// u = ln(nu).  Written for sharply structured positive integrands: panels
// subdivide until the local Simpson discrepancy meets a proportional share
// of the global tolerance or the depth cap is reached.
QuadratureResult integrate_log_adaptive(const std::function<double(double)>& f,
                                        double a, double b,
                                        const QuadratureOptions& opt = {});

}  // namespace qnforce
