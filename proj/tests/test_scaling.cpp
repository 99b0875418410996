#include <doctest.h>

#include <cmath>

#include "qnforce/constants.hpp"
#include "qnforce/scaling.hpp"

using namespace qnforce;
using constants::two_pi;
using doctest::Approx;

TEST_CASE("scaled parameters reproduce the reference detector at the base "
          "radius") {
  const ScalingConfig cfg;
  const auto pt = scale_parameters(cfg.R_base, cfg, SweepReadout::Voltage);
  CHECK(pt.mech.m == Approx(1e-3).epsilon(0.10));      // ~1 g
  CHECK(pt.mech.L == Approx(1e-5).epsilon(0.10));      // ~10 uH
  CHECK(pt.mech.T_v == Approx(2.0).epsilon(0.05));     // ~2 T*m
  CHECK(pt.mech.omega_m() == Approx(two_pi * 10.0).epsilon(1e-12));
  CHECK(pt.nu_star == Approx(two_pi * 1e6));
  CHECK(pt.encounter.b == Approx(1e-3));
  CHECK(pt.encounter.m_dm == Approx(constants::planck_mass));
  // readout branch keeps the quoted impedance
  const auto cur = scale_parameters(cfg.R_base, cfg, SweepReadout::Current);
  CHECK(std::sqrt(*cur.mech.L_M / cur.mech.C_L) ==
        Approx(cfg.Z0_x).epsilon(1e-12));
  CHECK(std::sqrt(pt.mech.L / pt.mech.C_L) ==
        Approx(cfg.Z0_v).epsilon(1e-12));
}

TEST_CASE("scaling rules") {
  const ScalingConfig cfg;

  SUBCASE("a 10 cm sensor weighs about a metric ton") {
    const auto pt = scale_parameters(0.1, cfg, SweepReadout::Voltage);
    CHECK(pt.mech.m == Approx(942.0).epsilon(0.01));
  }

  SUBCASE("coupling shift falls as 1/R") {
    // T_v ~ R^2, m ~ R^3, L ~ R^3 so delta_v^2 = T_v^2/(m L) ~ R^-2.
    const auto a = scale_parameters(1e-3, cfg, SweepReadout::Voltage);
    const auto b = scale_parameters(1e-2, cfg, SweepReadout::Voltage);
    const double da =
        std::sqrt(a.mech.T_v * a.mech.T_v / (a.mech.m * a.mech.L));
    const double db =
        std::sqrt(b.mech.T_v * b.mech.T_v / (b.mech.m * b.mech.L));
    CHECK(da / db == Approx(10.0).epsilon(1e-10));
  }

  SUBCASE("every scaled set passes the parameter invariants") {
    for (const double r : log_radius_grid(1e-3, 1.0, 12)) {
      for (const auto readout :
           {SweepReadout::Voltage, SweepReadout::Current}) {
        const auto pt = scale_parameters(r, cfg, readout);
        pt.mech.validate();  // throws on violation
        pt.cavity.validate();
        pt.encounter.validate();
        CHECK(*pt.mech.L_M < pt.mech.L);
        CHECK(pt.cavity.G > 0);
      }
    }
  }

  SUBCASE("radius must be positive") {
    CHECK_THROWS_AS(scale_parameters(0.0, cfg, SweepReadout::Voltage),
                    DomainError);
  }
}

TEST_CASE("radius sweep table") {
  const ScalingConfig cfg;

  SUBCASE("single-point grid gives a single row") {
    const auto t = radius_sweep({1e-3}, cfg);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].R == 1e-3);
    CHECK(t.rows[0].snr2_voltage > 0);
    CHECK(t.failures.empty());
  }

  SUBCASE("grid outside the supported span is rejected") {
    CHECK_THROWS_AS(radius_sweep({2.0}, cfg), ConfigError);
    CHECK_THROWS_AS(radius_sweep({}, cfg), ConfigError);
  }

  SUBCASE("monotone growth and the expected slopes") {
    const auto grid = log_radius_grid(1e-3, 1.0, 13);
    const auto t = radius_sweep(grid, cfg);
    REQUIRE(t.rows.size() == grid.size());
    CHECK(t.failures.empty());
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      CHECK(t.rows[i].snr2_voltage > t.rows[i - 1].snr2_voltage);
      CHECK(t.rows[i].snr2_current > t.rows[i - 1].snr2_current);
      CHECK(t.rows[i].snr2_position > t.rows[i - 1].snr2_position);
      CHECK(t.rows[i].snr2_sql > t.rows[i - 1].snr2_sql);
    }
    std::vector<double> r, v, c, p, s;
    for (const auto& row : t.rows) {
      if (row.R < 1e-2) continue;
      r.push_back(row.R);
      v.push_back(row.snr2_voltage);
      c.push_back(row.snr2_current);
      p.push_back(row.snr2_position);
      s.push_back(row.snr2_sql);
    }
    CHECK(fit_loglog_slope(r, v) == Approx(2.5).epsilon(0.04));
    CHECK(fit_loglog_slope(r, c) == Approx(2.0).epsilon(0.05));
    CHECK(fit_loglog_slope(r, p) == Approx(2.0).epsilon(0.05));
    CHECK(fit_loglog_slope(r, s) == Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("log-log slope fitter") {
  // y = 3 x^2 exactly
  std::vector<double> x, y;
  for (double v = 1.0; v < 1e3; v *= 2.0) {
    x.push_back(v);
    y.push_back(3.0 * v * v);
  }
  CHECK(fit_loglog_slope(x, y) == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog_slope({1.0}, {1.0}), DomainError);
}
