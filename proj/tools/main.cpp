// qnforce command-line front end: spectra, matched-filter SNRs, radius
// sweeps, equilibrium and system-matrix dumps.
//
// Exit codes: 0 success, 1 usage/configuration, 2 numerical failure,
// 3 engine cross-check mismatch.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnforce/config.hpp"
#include "qnforce/constants.hpp"
#include "qnforce/dynamics.hpp"
#include "qnforce/noise.hpp"
#include "qnforce/scaling.hpp"
#include "qnforce/signal.hpp"
#include "qnforce/svg.hpp"

namespace {

using namespace qnforce;
using constants::two_pi;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitMismatch = 3;

struct GridSpec {
  double f_min = 1.0;
  double f_max = 1e10;
  std::size_t points = 2000;
};

GridSpec parse_grid(const std::string& spec) {
  GridSpec g;
  double points = 0;
  char mode[8] = {0};
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf:%7s", &g.f_min, &g.f_max,
                  &points, mode) != 4 ||
      std::string(mode) != "log")
    throw ConfigError("grid spec must be 'min_hz:max_hz:points:log'");
  if (!(g.f_min > 0) || !(g.f_max > g.f_min) || points < 2)
    throw ConfigError("grid requires 0 < min < max and points >= 2");
  g.points = static_cast<std::size_t>(points);
  return g;
}

std::unique_ptr<std::ostream> open_output(const std::string& path,
                                          std::ostream** out) {
  if (path.empty() || path == "-") {
    *out = &std::cout;
    return nullptr;
  }
  auto file = std::make_unique<std::ofstream>(path);
  if (!*file) throw ConfigError("cannot open output file '" + path + "'");
  *out = file.get();
  return file;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

double need(const std::map<std::string, double>& section,
            const std::string& section_name, const std::string& key) {
  const auto it = section.find(key);
  if (it == section.end())
    throw ConfigError("missing key '" + key + "' in section [" +
                      section_name + "]");
  return it->second;
}

struct PsdArgs {
  std::string case_name;
  std::string params_path;
  std::string grid = "1:1e10:2000:log";
  std::string out;
  std::string svg;
  std::string engine = "numeric";
  int gauge = 1;
  double coupling_hz = 0;  // 0: use config
  bool no_cross_check = false;
};

int run_optomech_psd(const PsdArgs& args) {
  const auto cfg = parse_config_file(args.params_path);
  OptomechRefParams p;
  p.m = need(cfg.mechanics, "mechanics", "mass");
  p.omega_m = two_pi * need(cfg.mechanics, "mechanics", "resonance_hz");
  p.mu = cfg.mechanics.count("damping_hz")
             ? two_pi * cfg.mechanics.at("damping_hz")
             : 0.0;
  p.kappa = two_pi * need(cfg.cavity, "cavity", "kappa_hz");
  if (args.coupling_hz > 0) {
    p.G = two_pi * args.coupling_hz;
  } else if (cfg.cavity.count("coupling_hz")) {
    p.G = two_pi * cfg.cavity.at("coupling_hz");
  } else {
    p.G = optomech_optimized_coupling(
        p, two_pi * need(cfg.cavity, "cavity", "sql_target_hz"));
  }
  slave_velocity_coupling(&p);
  const auto mode = args.case_name == "optomech-position"
                        ? OptomechMode::Position
                        : OptomechMode::Velocity;
  const ThermalModel thermal = build_thermal(cfg);

  const auto g = parse_grid(args.grid);
  const auto nu = log_grid_rad(g.f_min, g.f_max, g.points);
  NoiseSpectrum spec;
  spec.nu_grid = nu;
  for (double v : nu) {
    const auto pt = optomech_reference_psd(mode, p, thermal, v);
    spec.total.push_back(pt.total);
    spec.backaction.push_back(pt.backaction);
    spec.shot.push_back(pt.shot);
    spec.thermal.push_back(pt.thermal);
  }
  std::ostream* os = nullptr;
  auto holder = open_output(args.out, &os);
  write_spectrum_csv(*os, spec, "case: " + args.case_name);
  if (!args.svg.empty()) {
    std::ofstream svg(args.svg);
    SvgPlot plot;
    plot.title = args.case_name;
    plot.x_label = "frequency (Hz)";
    plot.y_label = "force noise PSD (N^2/Hz)";
    std::vector<double> f(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) f[i] = nu[i] / two_pi;
    plot.series.push_back({"total", "#333333", f, spec.total, false});
    plot.series.push_back({"backaction", "#b22222", f, spec.backaction, false});
    plot.series.push_back({"shot", "#1f77b4", f, spec.shot, true});
    write_loglog_svg(svg, plot);
  }
  return kExitOk;
}

int run_psd(const PsdArgs& args) {
  if (args.case_name.rfind("optomech-", 0) == 0) return run_optomech_psd(args);

  const auto cfg = parse_config_file(args.params_path);
  const DetectorCase det = make_case(parse_case_kind(args.case_name),
                                     args.gauge);
  const auto params = build_detector_params(cfg, det);
  auto cavity = build_cavity(cfg, det, params);
  if (args.coupling_hz > 0) {
    cavity.G = two_pi * args.coupling_hz;
    if (det.kind == CaseKind::EmVoltage)
      cavity.G_x =
          std::get<ReducedElectroMechParams>(params).T_x * cavity.G;
  }
  const ThermalModel thermal = build_thermal(cfg);

  const auto g = parse_grid(args.grid);
  const auto nu = log_grid_rad(g.f_min, g.f_max, g.points);
  const bool closed = args.engine == "closed-form";
  if (closed && cavity.Delta != 0.0)
    throw DomainError("closed-form engine requires zero detuning");

  const auto spec = noise_breakdown(det, params, cavity, thermal, nu, closed);
  for (const auto& flag : spec.flags)
    std::cerr << "# warning: point " << flag.index << " (f = "
              << nu[flag.index] / two_pi << " Hz): " << flag.what << "\n";

  // Cross-check the two engines away from masked pole points.
  if (!args.no_cross_check && cavity.Delta == 0.0) {
    const auto poles = real_pole_frequencies(det, params, cavity);
    double worst = 0, worst_nu = 0;
    for (std::size_t i = 0; i < nu.size(); ++i) {
      if (near_any_pole(nu[i], poles)) {
        std::cerr << "# warning: cross-check masked near pole at f = "
                  << nu[i] / two_pi << " Hz\n";
        continue;
      }
      if (!std::isfinite(spec.total[i])) continue;
      const auto other =
          closed ? psd_numeric(det, params, cavity, thermal, nu[i])
                 : psd_closed_form(det, params, cavity, thermal, nu[i]);
      const double rel = std::abs(other.total - spec.total[i]) /
                         std::max(other.total, spec.total[i]);
      if (rel > worst) {
        worst = rel;
        worst_nu = nu[i];
      }
    }
    if (worst > 1e-6) {
      std::cerr << "engine cross-check failed: relative difference " << worst
                << " at f = " << worst_nu / two_pi << " Hz\n";
      return kExitMismatch;
    }
  }

  std::ostream* os = nullptr;
  auto holder = open_output(args.out, &os);
  write_spectrum_csv(*os, spec,
                     "case: " + case_name(det) + ", engine: " + args.engine);
  if (!args.svg.empty()) {
    std::ofstream svg(args.svg);
    SvgPlot plot;
    plot.title = case_name(det);
    plot.x_label = "frequency (Hz)";
    plot.y_label = "force noise PSD (N^2/Hz)";
    std::vector<double> f(nu.size());
    for (std::size_t i = 0; i < nu.size(); ++i) f[i] = nu[i] / two_pi;
    plot.series.push_back({"total", "#333333", f, spec.total, false});
    plot.series.push_back({"backaction", "#b22222", f, spec.backaction, false});
    plot.series.push_back({"shot", "#1f77b4", f, spec.shot, true});
    write_loglog_svg(svg, plot);
  }
  return kExitOk;
}

struct SnrArgs {
  std::string case_name;
  std::string params_path;
  std::string out;
  std::string form = "approx";
  double white_noise = 0;  // N^2/Hz; 0 disables the override
};

int run_snr(const SnrArgs& args) {
  const auto cfg = parse_config_file(args.params_path);
  const auto encounter = build_encounter(cfg);

  SnrOptions opt;
  opt.form = args.form == "exact" ? SignalForm::Exact : SignalForm::Approx;

  std::function<double(double)> psd;
  if (args.white_noise > 0) {
    const double s0 = args.white_noise;
    psd = [s0](double) { return s0; };
  } else {
    const DetectorCase det = make_case(parse_case_kind(args.case_name));
    const auto params = build_detector_params(cfg, det);
    const auto cavity = build_cavity(cfg, det, params);
    const ThermalModel thermal = build_thermal(cfg);
    if (cavity.Delta != 0.0)
      throw DomainError("snr requires zero detuning");
    psd = [det, params, cavity, thermal](double nu) {
      return psd_closed_form(det, params, cavity, thermal, nu).total;
    };
  }
  SnrResult r;
  try {
    r = snr_opt(encounter, psd, opt);
  } catch (const AccuracyError& e) {
    // The noise floor at a backaction null can sit below double-precision
    // resolution; report the best estimate with its error instead of dying.
    r.snr_sq = e.best_estimate();
    r.quadrature_error = e.error_estimate();
    r.nu_max = opt.nu_max > 0 ? opt.nu_max : 40.0 * encounter.v / encounter.b;
    std::cerr << "# warning: quadrature reached its resolution limit; "
              << "relative error estimate " << r.quadrature_error << "\n";
  }

  std::ostream* os = nullptr;
  auto holder = open_output(args.out, &os);
  *os << "# matched-filter SNR, form: " << args.form << "\n";
  *os << "case,snr_sq,nu_max_rad_s,quadrature_error\n";
  *os << (args.white_noise > 0 ? "white-noise" : args.case_name) << ","
      << fmt(r.snr_sq) << "," << fmt(r.nu_max) << ","
      << fmt(r.quadrature_error) << "\n";
  return kExitOk;
}

struct SweepArgs {
  std::string params_path;
  std::string radii;  // min:max:points, empty = config/defaults
  std::string out;
  std::string svg;
};

int run_sweep(const SweepArgs& args) {
  SweepSpec spec;
  if (!args.params_path.empty())
    spec = build_sweep(parse_config_file(args.params_path));
  if (!args.radii.empty()) {
    double points = 0;
    if (std::sscanf(args.radii.c_str(), "%lf:%lf:%lf", &spec.r_min,
                    &spec.r_max, &points) != 3 ||
        points < 1)
      throw ConfigError("radius spec must be 'min_m:max_m:points'");
    spec.points = static_cast<std::size_t>(points);
  }
  const auto grid = log_radius_grid(spec.r_min, spec.r_max, spec.points);
  const auto table = radius_sweep(grid, spec.config);

  std::ostream* os = nullptr;
  auto holder = open_output(args.out, &os);
  *os << "# SNR^2 of the scaled sensor family against radius\n";
  *os << "R_m,snr2_voltage,snr2_current,snr2_position,snr2_sql\n";
  std::size_t bad = 0;
  for (const auto& row : table.rows) {
    const bool ok = std::isfinite(row.snr2_voltage) &&
                    std::isfinite(row.snr2_current) &&
                    std::isfinite(row.snr2_position) &&
                    std::isfinite(row.snr2_sql);
    if (!ok) ++bad;
    *os << fmt(row.R) << "," << fmt(row.snr2_voltage) << ","
        << fmt(row.snr2_current) << "," << fmt(row.snr2_position) << ","
        << fmt(row.snr2_sql) << "\n";
  }
  for (const auto& f : table.failures) *os << "# failed: " << f << "\n";

  // Slope summary over the upper two decades.
  std::vector<double> r, v, c, p, s;
  for (const auto& row : table.rows) {
    if (row.R < 1e-2) continue;
    r.push_back(row.R);
    v.push_back(row.snr2_voltage);
    c.push_back(row.snr2_current);
    p.push_back(row.snr2_position);
    s.push_back(row.snr2_sql);
  }
  if (r.size() >= 3) {
    *os << "# slope snr2_voltage = " << fmt(fit_loglog_slope(r, v))
        << " (log-log fit over R >= 1e-2 m)\n";
    *os << "# slope snr2_current = " << fmt(fit_loglog_slope(r, c)) << "\n";
    *os << "# slope snr2_position = " << fmt(fit_loglog_slope(r, p)) << "\n";
    *os << "# slope snr2_sql = " << fmt(fit_loglog_slope(r, s)) << "\n";
  }

  if (!args.svg.empty()) {
    std::ofstream svg(args.svg);
    SvgPlot plot;
    plot.title = "matched-filter SNR^2 vs sensor radius";
    plot.x_label = "radius (m)";
    plot.y_label = "SNR^2";
    std::vector<double> rr, vv, cc, pp, ss;
    for (const auto& row : table.rows) {
      rr.push_back(row.R);
      vv.push_back(row.snr2_voltage);
      cc.push_back(row.snr2_current);
      pp.push_back(row.snr2_position);
      ss.push_back(row.snr2_sql);
    }
    plot.series.push_back({"voltage readout", "#1f77b4", rr, vv, false});
    plot.series.push_back({"current readout", "#2ca02c", rr, cc, false});
    plot.series.push_back({"position reference", "#ff7f0e", rr, pp, false});
    plot.series.push_back({"free-particle floor", "#555555", rr, ss, true});
    write_loglog_svg(svg, plot);
  }

  return 10 * bad <= table.rows.size() ? kExitOk : kExitNumerical;
}

int run_equilibrium(const std::string& params_path) {
  const auto cfg = parse_config_file(params_path);
  ElectroMechParams p;
  p.m = need(cfg.mechanics, "mechanics", "mass");
  p.k = cfg.mechanics.count("spring_constant")
            ? cfg.mechanics.at("spring_constant")
            : p.m * std::pow(two_pi * need(cfg.mechanics, "mechanics",
                                           "resonance_hz"),
                             2);
  p.A = need(cfg.circuit, "circuit", "plate_area");
  p.d0 = need(cfg.circuit, "circuit", "gap");
  p.V_DC = need(cfg.circuit, "circuit", "v_dc");
  p.C_P = need(cfg.circuit, "circuit", "c_p");
  p.L = need(cfg.circuit, "circuit", "inductance");
  if (cfg.circuit.count("l_m")) p.L_M = cfg.circuit.at("l_m");
  const auto eq = find_equilibrium(p);
  const auto t = transducer_constant_x(p, eq);
  std::cout << "# electromechanical operating point\n";
  std::cout << "q0 = " << fmt(eq.Q0) << "\n";
  std::cout << "x0 = " << fmt(eq.x0) << "\n";
  std::cout << "v_min = " << fmt(eq.V_min) << "\n";
  std::cout << "hessian_qq = " << fmt(eq.hessian[0][0]) << "\n";
  std::cout << "hessian_qx = " << fmt(eq.hessian[0][1]) << "\n";
  std::cout << "hessian_xx = " << fmt(eq.hessian[1][1]) << "\n";
  std::cout << "residual = " << fmt(eq.residual) << "\n";
  std::cout << "t_x = " << fmt(t.T_x) << "\n";
  std::cout << "k_eff = " << fmt(t.k_eff) << "\n";
  std::cout << "c_eff = " << fmt(t.C_eff) << "\n";
  return kExitOk;
}

int run_matrix(const std::string& case_name_arg,
               const std::string& params_path, int gauge,
               const std::string& out) {
  const auto cfg = parse_config_file(params_path);
  const DetectorCase det = make_case(parse_case_kind(case_name_arg), gauge);
  const auto params = build_detector_params(cfg, det);
  const auto cavity = build_cavity(cfg, det, params);
  const auto sm = build_system_matrix(det, params, cavity);
  std::ostream* os = nullptr;
  auto holder = open_output(out, &os);
  *os << "# system matrix: " << case_name(det)
      << " (operator order x,p,phi,q,x_quad,y_quad)\n";
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j)
      *os << fmt(sm.entries[i][j]) << (j == 5 ? "\n" : ",");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-noise-limited force sensing through electrical "
               "transducers"};
  app.require_subcommand(1);

  PsdArgs psd_args;
  auto* psd = app.add_subcommand("psd", "force-noise spectrum over a grid");
  psd->add_option("--case", psd_args.case_name,
                  "mm-voltage|mm-current|em-voltage|em-current|"
                  "optomech-position|optomech-velocity")
      ->required();
  psd->add_option("--params", psd_args.params_path, "configuration file")
      ->required();
  psd->add_option("--grid", psd_args.grid, "min_hz:max_hz:points:log");
  psd->add_option("--out", psd_args.out, "output CSV ('-' for stdout)");
  psd->add_option("--svg", psd_args.svg, "optional SVG plot");
  psd->add_option("--engine", psd_args.engine, "numeric|closed-form")
      ->check(CLI::IsMember({"numeric", "closed-form"}));
  psd->add_option("--gauge", psd_args.gauge, "circuit gauge (1 or 2)");
  psd->add_option("--coupling-hz", psd_args.coupling_hz,
                  "override the cavity coupling (Hz per C, Wb, or m)");
  psd->add_flag("--no-cross-check", psd_args.no_cross_check,
                "skip the closed-form/numeric comparison");

  SnrArgs snr_args;
  auto* snr = app.add_subcommand("snr", "matched-filter SNR^2");
  snr->add_option("--case", snr_args.case_name, "detector case")->required();
  snr->add_option("--params", snr_args.params_path, "configuration file")
      ->required();
  snr->add_option("--out", snr_args.out, "output CSV ('-' for stdout)");
  snr->add_option("--form", snr_args.form, "approx|exact")
      ->check(CLI::IsMember({"approx", "exact"}));
  snr->add_option("--white-noise", snr_args.white_noise,
                  "replace the detector PSD by a white floor (N^2/Hz)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "SNR^2 against sensor radius");
  sweep->add_option("--params", sweep_args.params_path,
                    "configuration file (optional [sweep] overrides)");
  sweep->add_option("--radii", sweep_args.radii, "min_m:max_m:points");
  sweep->add_option("--out", sweep_args.out, "output CSV ('-' for stdout)");
  sweep->add_option("--svg", sweep_args.svg, "optional SVG plot");

  std::string eq_params;
  auto* eq = app.add_subcommand("equilibrium",
                                "biased operating point of the capacitive "
                                "transducer");
  eq->add_option("--params", eq_params, "configuration file")->required();

  std::string mx_case, mx_params, mx_out;
  int mx_gauge = 1;
  auto* mx = app.add_subcommand("matrix", "dump a drift matrix as CSV");
  mx->add_option("--case", mx_case, "detector case")->required();
  mx->add_option("--params", mx_params, "configuration file")->required();
  mx->add_option("--gauge", mx_gauge, "circuit gauge (1 or 2)");
  mx->add_option("--out", mx_out, "output ('-' for stdout)");

  try {
    app.parse(argc, argv);
    if (psd->parsed()) return run_psd(psd_args);
    if (snr->parsed()) return run_snr(snr_args);
    if (sweep->parsed()) return run_sweep(sweep_args);
    if (eq->parsed()) return run_equilibrium(eq_params);
    if (mx->parsed()) return run_matrix(mx_case, mx_params, mx_gauge, mx_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
