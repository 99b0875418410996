#include <doctest.h>

#include <cmath>
#include <complex>

#include "qnforce/constants.hpp"
#include "qnforce/dynamics.hpp"
#include "qnforce/noise.hpp"
#include "support/oracles.hpp"

using namespace qnforce;
using namespace qnforce::testing;
using constants::hbar;
using constants::two_pi;
using doctest::Approx;

namespace {

double rel(std::complex<double> a, std::complex<double> b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0 ? 0.0 : std::abs(a - b) / s;
}

CavityParams sql_cavity(const DetectorCase& c, const DetectorParams& p,
                        bool slave_gx = true) {
  auto cav = reference_cavity();
  cav.G = optimized_coupling(c, p, cav, two_pi * 1e6);
  if (slave_gx && c.kind == CaseKind::EmVoltage)
    cav.G_x = std::get<ReducedElectroMechParams>(p).T_x * cav.G;
  return cav;
}

}  // namespace

TEST_CASE("drift matrix entries match their definitions") {
  const auto mm = reference_mm_params();
  const auto em = reference_em_params();
  auto cav = reference_cavity();
  cav.G = 1e20;

  SUBCASE("magnetomechanical voltage, gauge 1") {
    const auto sm = build_system_matrix(make_case(CaseKind::MmVoltage, 1),
                                        DetectorParams(mm), cav);
    const auto& e = sm.entries;
    CHECK(e[0][3] == -mm.T_v / mm.m);                     // (1,4)
    CHECK(e[5][3] == cav.G);                              // (6,4)
    CHECK(e[1][0] == -mm.k);
    CHECK(e[2][3] == Approx(1.0 / mm.C_L + mm.T_v * mm.T_v / mm.m));
    CHECK(e[2][4] == -hbar * cav.G);
    CHECK(e[3][2] == -1.0 / mm.L);
    CHECK(e[4][4] == -cav.kappa / 2);
    CHECK(e[5][5] == -cav.kappa / 2);
  }

  SUBCASE("magnetomechanical voltage, gauge 2") {
    const auto sm = build_system_matrix(make_case(CaseKind::MmVoltage, 2),
                                        DetectorParams(mm), cav);
    const auto& e = sm.entries;
    CHECK(e[1][0] == Approx(-(mm.k + mm.T_v * mm.T_v / mm.L)));
    CHECK(e[1][2] == mm.T_v / mm.L);
    CHECK(e[3][0] == mm.T_v / mm.L);
    CHECK(e[2][3] == 1.0 / mm.C_L);
  }

  SUBCASE("magnetomechanical current, gauge 1") {
    const auto sm = build_system_matrix(make_case(CaseKind::MmCurrent, 1),
                                        DetectorParams(mm), cav);
    const auto& e = sm.entries;
    CHECK(e[1][0] == Approx(-(mm.k + mm.T_v * mm.T_v / *mm.L_M)));
    CHECK(e[1][2] == -mm.T_v / *mm.L_M);
    CHECK(e[1][4] == hbar * cav.G * mm.T_v);
    CHECK(e[3][2] == Approx(-(1.0 / mm.L + 1.0 / *mm.L_M)));
    CHECK(e[3][4] == hbar * cav.G);
    CHECK(e[5][0] == cav.G * mm.T_v);
    CHECK(e[5][2] == cav.G);
  }

  SUBCASE("electromechanical voltage includes the position coupling") {
    auto cav_x = cav;
    cav_x.G_x = em.T_x * cav.G;
    const auto sm = build_system_matrix(make_case(CaseKind::EmVoltage),
                                        DetectorParams(em), cav_x);
    const auto& e = sm.entries;
    CHECK(e[1][4] == -hbar * cav_x.G_x);  // (2,5)
    CHECK(e[5][0] == -cav_x.G_x);         // (6,1)
    CHECK(e[1][0] == -em.k_eff);
    CHECK(e[1][3] == em.T_x / em.C_P);
    CHECK(e[2][0] == -em.T_x / em.C_P);
    CHECK(e[2][3] == Approx(1.0 / em.C_eff()));
    CHECK(e[2][4] == hbar * cav.G);
    CHECK(e[5][3] == -cav.G);
  }

  SUBCASE("electromechanical current") {
    const auto sm = build_system_matrix(make_case(CaseKind::EmCurrent),
                                        DetectorParams(em), cav);
    const auto& e = sm.entries;
    CHECK(e[3][2] == Approx(-(1.0 / em.L + 1.0 / *em.L_M)));
    CHECK(e[3][4] == -hbar * cav.G);
    CHECK(e[5][2] == -cav.G);
  }

  SUBCASE("zero couplings decouple mechanics, circuit, and cavity") {
    auto mm0 = mm;
    mm0.T_v = 0;
    CavityParams cav0 = reference_cavity();
    const auto sm = build_system_matrix(make_case(CaseKind::MmVoltage, 1),
                                        DetectorParams(mm0), cav0);
    const auto& e = sm.entries;
    // mechanics (0,1) x circuit (2,3) x cavity (4,5) block structure
    for (int i : {0, 1})
      for (int j : {2, 3, 4, 5}) {
        CHECK(e[i][j] == 0.0);
        CHECK(e[j][i] == 0.0);
      }
    for (int i : {2, 3})
      for (int j : {4, 5}) {
        CHECK(e[i][j] == 0.0);
        CHECK(e[j][i] == 0.0);
      }
  }

  SUBCASE("inconsistent combinations are rejected") {
    auto cav_x = cav;
    cav_x.G_x = 1.0;
    CHECK_THROWS_AS(build_system_matrix(make_case(CaseKind::MmVoltage),
                                        DetectorParams(mm), cav_x),
                    ConfigError);
    CHECK_THROWS_AS(build_system_matrix(make_case(CaseKind::EmVoltage),
                                        DetectorParams(mm), cav),
                    ConfigError);
  }
}

TEST_CASE("output coefficients match the analytic solutions") {
  for (CaseKind kind : {CaseKind::MmVoltage, CaseKind::MmCurrent,
                        CaseKind::EmVoltage, CaseKind::EmCurrent}) {
    CAPTURE(case_name(kind));
    const DetectorCase c = make_case(kind);
    const DetectorParams p =
        c.magnetomechanical() ? DetectorParams(reference_mm_params())
                              : DetectorParams(reference_em_params());
    const auto cav = sql_cavity(c, p);
    const auto poles = real_pole_frequencies(c, p, cav);
    const auto grid = log_grid_rad(1.0, 1e10, 600);
    double worst = 0;
    for (const double nu : grid) {
      if (near_any_pole(nu, poles)) continue;
      const auto num = solve_output(c, p, cav, nu);
      const auto cf = y_out_closed_form(c, p, cav, nu);
      worst = std::max({worst, rel(num.raw.r, cf.r),
                        rel(num.raw.x_coeff, cf.x_coeff),
                        rel(num.raw.c_F, cf.c_F)});
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("gauge choice changes nothing observable") {
  const DetectorParams p(reference_mm_params());
  for (CaseKind kind : {CaseKind::MmVoltage, CaseKind::MmCurrent}) {
    CAPTURE(case_name(kind));
    const auto cav = sql_cavity(make_case(kind), p);
    const auto grid = log_grid_rad(1.0, 1e10, 400);
    for (const double nu : grid) {
      const auto g1 = solve_output(make_case(kind, 1), p, cav, nu);
      const auto g2 = solve_output(make_case(kind, 2), p, cav, nu);
      REQUIRE(std::abs(std::abs(g1.raw.c_F) - std::abs(g2.raw.c_F)) <=
              1e-9 * std::abs(g1.raw.c_F));
      REQUIRE(std::abs(std::abs(g1.raw.x_coeff) - std::abs(g2.raw.x_coeff)) <=
              1e-9 * std::abs(g1.raw.x_coeff) + 1e-300);
      REQUIRE(std::abs(std::abs(g1.raw.r) - std::abs(g2.raw.r)) <= 1e-12);
    }
  }
}

TEST_CASE("reflection is unimodular at zero detuning") {
  const DetectorParams p(reference_em_params());
  const DetectorCase c = make_case(CaseKind::EmCurrent);
  const auto cav = sql_cavity(c, p);
  for (const double nu : log_grid_rad(1.0, 1e10, 200)) {
    const auto sol = solve_output(c, p, cav, nu);
    CHECK(std::abs(sol.raw.r) == Approx(1.0).epsilon(1e-12));
    const auto cf = y_out_closed_form(c, p, cav, nu);
    CHECK(std::abs(cf.r) == Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("empty cavity reflects the phase quadrature") {
  // G = 0: Y_out = -((kappa/2 - i nu)/(kappa/2 + i nu)) Y_in, and the force
  // path disappears.
  const DetectorParams p(reference_mm_params());
  const auto cav = reference_cavity();  // G = 0
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  for (const double nu : {12.0, 5.1e4, 3.3e8}) {
    const auto sol = solve_output(c, p, cav, nu);
    const std::complex<double> expected =
        -std::complex<double>(cav.kappa / 2, -nu) /
        std::complex<double>(cav.kappa / 2, nu);
    CHECK(rel(sol.raw.r, expected) < 1e-13);
    CHECK(std::abs(sol.raw.r) == Approx(1.0).epsilon(1e-13));
    CHECK(sol.raw.c_F == std::complex<double>(0, 0));
  }
  CHECK_THROWS_AS(estimator_coefficients(c, p, cav, 1e3), ZeroSignalError);
}

TEST_CASE("backaction path vanishes exactly on resonance") {
  const DetectorParams p(reference_mm_params());
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  const auto cav = sql_cavity(c, p);
  const double w_m = std::sqrt(reference_mm_params().k /
                               reference_mm_params().m);
  const auto cf = y_out_closed_form(c, p, cav, w_m);
  CHECK(cf.x_coeff == std::complex<double>(0, 0));
  // numeric path: suppressed by twenty orders against a neighbor
  const auto sol = solve_output(c, p, cav, w_m);
  const auto nearby = solve_output(c, p, cav, w_m * 1.01);
  CHECK(std::norm(sol.beta) < 1e-20 * std::norm(nearby.beta));
}

TEST_CASE("velocity coupling kills the DC signal path") {
  // em-current force coefficient is proportional to i nu.
  const DetectorParams p(reference_em_params());
  const DetectorCase c = make_case(CaseKind::EmCurrent);
  const auto cav = sql_cavity(c, p);
  const auto cf = y_out_closed_form(c, p, cav, 0.0);
  CHECK(cf.c_F == std::complex<double>(0, 0));
  // and dominated by the imaginary part at low frequency
  const auto low = y_out_closed_form(c, p, cav, 1.0);
  CHECK(std::abs(low.c_F.imag()) > 1e3 * std::abs(low.c_F.real()));
}

TEST_CASE("mm-current backaction zero sits at the dressed resonance") {
  const auto mm = reference_mm_params();
  const DetectorParams p(mm);
  const DetectorCase c = make_case(CaseKind::MmCurrent);
  const auto cav = sql_cavity(c, p);
  const double nu0 = backaction_zero(c, p, cav);
  CHECK(nu0 * nu0 ==
        Approx(mm.k / mm.m + mm.T_v * mm.T_v / (mm.m * mm.L)).epsilon(1e-12));
  const auto at = y_out_closed_form(c, p, cav, nu0);
  const auto nearby = y_out_closed_form(c, p, cav, nu0 * 1.01);
  CHECK(std::norm(at.x_coeff) < 1e-20 * std::norm(nearby.x_coeff));
}

TEST_CASE("resolvent health on the standard grid") {
  const DetectorParams p(reference_mm_params());
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  const auto cav = sql_cavity(c, p);
  const auto poles = real_pole_frequencies(c, p, cav);
  for (const double nu : log_grid_rad(1.0, 1e10, 300)) {
    if (near_any_pole(nu, poles)) continue;
    const auto sol = solve_output(c, p, cav, nu);
    CHECK(sol.residual_inf < 1e-10);
    CHECK(!sol.flagged);
  }
}

TEST_CASE("coefficients at negative frequency are conjugates") {
  const DetectorParams p(reference_em_params());
  const DetectorCase c = make_case(CaseKind::EmVoltage);
  const auto cav = sql_cavity(c, p);
  for (const double nu : {3.7, 1.1e5, 9.4e8}) {
    const auto plus = solve_output(c, p, cav, nu);
    const auto minus = solve_output(c, p, cav, -nu);
    CHECK(rel(minus.raw.r, std::conj(plus.raw.r)) < 1e-14);
    CHECK(rel(minus.raw.x_coeff, std::conj(plus.raw.x_coeff)) < 1e-14);
    CHECK(rel(minus.raw.c_F, std::conj(plus.raw.c_F)) < 1e-14);
  }
}

TEST_CASE("nonzero detuning solves but is flagged off-oracle") {
  const DetectorParams p(reference_mm_params());
  auto cav = sql_cavity(make_case(CaseKind::MmVoltage), p);
  cav.Delta = two_pi * 1e5;
  const auto sol =
      estimator_coefficients(make_case(CaseKind::MmVoltage), p, cav, 1e6);
  CHECK(sol.non_oracle);
  CHECK(std::isfinite(sol.beta.real()));
  CHECK_THROWS_AS(
      y_out_closed_form(make_case(CaseKind::MmVoltage), p, cav, 1e6),
      DomainError);
}
