#include "qnforce/quadrature.hpp"

#include <cmath>
#include <queue>
#include <tuple>
#include <vector>

#include "qnforce/errors.hpp"

namespace qnforce {

namespace {

// One panel with its two-interval Simpson value and Richardson error
// estimate; the quarter-point samples are kept so children reuse them.
struct Panel {
  double a = 0, b = 0;
  double fa = 0, fm = 0, fb = 0;
  double flm = 0, frm = 0;
  double value = 0, error = 0;
};

struct Quad {
  const std::function<double(double)>* g;
  long evaluations = 0;

  double eval(double u) {
    ++evaluations;
    const double v = (*g)(u);
    if (!std::isfinite(v))
      throw DomainError("integrand not finite inside the domain");
    return v;
  }

  Panel make(double a, double b, double fa, double fm, double fb) {
    Panel p;
    p.a = a;
    p.b = b;
    p.fa = fa;
    p.fm = fm;
    p.fb = fb;
    const double m = 0.5 * (a + b);
    p.flm = eval(0.5 * (a + m));
    p.frm = eval(0.5 * (m + b));
    const double h = b - a;
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    const double split =
        h / 12.0 * (fa + 4.0 * p.flm + 2.0 * fm + 4.0 * p.frm + fb);
    p.value = split + (split - whole) / 15.0;
    p.error = std::abs(split - whole) / 15.0;
    return p;
  }
};

}  // namespace

// Globally adaptive bisection: always split the panel carrying the largest
// error estimate.  Effort concentrates on narrow structures (the noise
// spectra have deep backaction nulls) while total work stays hard-bounded.
QuadratureResult integrate_log_adaptive(const std::function<double(double)>& f,
                                        double a, double b,
                                        const QuadratureOptions& opt) {
  if (!(a > 0) || !(b > a))
    throw DomainError("integration domain must satisfy 0 < a < b");

  const double ua = std::log(a);
  const double ub = std::log(b);
  const std::function<double(double)> g = [&f](double u) {
    const double nu = std::exp(u);
    return nu * f(nu);  // d(nu) = nu du
  };

  Quad quad;
  quad.g = &g;

  const double decades = (ub - ua) / std::log(10.0);
  const int initial =
      std::max(4, static_cast<int>(decades * opt.initial_panels_per_decade));

  std::vector<Panel> panels;
  panels.reserve(4096);
  {
    std::vector<double> nodes(2 * initial + 1), vals(2 * initial + 1);
    for (int i = 0; i <= 2 * initial; ++i) {
      nodes[i] = ua + (ub - ua) * i / (2.0 * initial);
      vals[i] = quad.eval(nodes[i]);
    }
    for (int i = 0; i < initial; ++i)
      panels.push_back(quad.make(nodes[2 * i], nodes[2 * i + 2], vals[2 * i],
                                 vals[2 * i + 1], vals[2 * i + 2]));
  }

  double total = 0, error = 0;
  using Entry = std::pair<double, std::size_t>;  // (error, panel index)
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    total += panels[i].value;
    error += panels[i].error;
    heap.push({panels[i].error, i});
  }

  const long max_bisections =
      static_cast<long>(1) << std::min(opt.max_depth, 18);  // hard cap
  double frozen_error = 0;
  long bisections = 0;
  while (error + frozen_error > opt.rel_tol * std::abs(total) &&
         bisections < max_bisections && !heap.empty()) {
    const auto [err, idx] = heap.top();
    heap.pop();
    if (err != panels[idx].error) continue;  // stale entry
    Panel p = panels[idx];
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {  // cannot subdivide further
      frozen_error += p.error;
      error -= p.error;
      panels[idx].error = 0;
      continue;
    }
    ++bisections;
    Panel left = quad.make(p.a, m, p.fa, p.flm, p.fm);
    Panel right = quad.make(m, p.b, p.fm, p.frm, p.fb);
    total += left.value + right.value - p.value;
    error += left.error + right.error - p.error;
    panels[idx] = left;
    heap.push({left.error, idx});
    panels.push_back(right);
    heap.push({right.error, panels.size() - 1});
  }

  QuadratureResult out;
  out.value = total;
  out.error_estimate = error + frozen_error;
  out.evaluations = quad.evaluations;
  out.converged = out.error_estimate <= 4.0 * opt.rel_tol * std::abs(total) ||
                  total == 0;
  return out;
}

}  // namespace qnforce
