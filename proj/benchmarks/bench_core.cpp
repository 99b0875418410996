// Microbenchmarks for the hot computational paths: the per-frequency
// resolvent solve (quad-refined), the closed-form spectra, the special
// function, and the matched-filter quadrature.

#include <benchmark/benchmark.h>

#include <complex>
#include <random>

#include "qnforce/constants.hpp"
#include "qnforce/dynamics.hpp"
#include "qnforce/linalg.hpp"
#include "qnforce/noise.hpp"
#include "qnforce/signal.hpp"

namespace {

using namespace qnforce;
using constants::two_pi;

MagnetoMechParams mm_reference() {
  MagnetoMechParams p;
  p.m = 1e-3;
  p.k = p.m * (two_pi * 10) * (two_pi * 10);
  p.T_v = 2.0;
  p.L = 1e-5;
  p.C_L = 1.0 / (p.L * (two_pi * 1e7) * (two_pi * 1e7));
  p.L_M = 1e-9;
  return p;
}

CavityParams sql_cavity(const DetectorCase& c, const DetectorParams& p) {
  CavityParams cav;
  cav.kappa = two_pi * 1e6;
  cav.G = optimized_coupling(c, p, cav, two_pi * 1e6);
  return cav;
}

void BM_ResolventSolve(benchmark::State& state) {
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  const DetectorParams p(mm_reference());
  const auto cav = sql_cavity(c, p);
  double nu = two_pi * 3.3e5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_output(c, p, cav, nu));
    nu *= 1.0000001;
  }
}
BENCHMARK(BM_ResolventSolve);

void BM_ClosedFormPsd(benchmark::State& state) {
  const DetectorCase c = make_case(CaseKind::MmCurrent);
  const DetectorParams p(mm_reference());
  const auto cav = sql_cavity(c, p);
  double nu = two_pi * 3.3e5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(psd_closed_form(c, p, cav, {}, nu));
    nu *= 1.0000001;
  }
}
BENCHMARK(BM_ClosedFormPsd);

void BM_SpectrumGrid(benchmark::State& state) {
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  const DetectorParams p(mm_reference());
  const auto cav = sql_cavity(c, p);
  const auto grid =
      log_grid_rad(1.0, 1e10, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(noise_breakdown(c, p, cav, {}, grid));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpectrumGrid)->Arg(200)->Arg(2000);

void BM_ComplexSolve6x6(benchmark::State& state) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ComplexMatrix<double> m(6, 6), b(6, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j)
      m(i, j) = std::complex<double>(dist(rng), dist(rng)) +
                (i == j ? std::complex<double>(4, 0)
                        : std::complex<double>(0, 0));
    for (std::size_t j = 0; j < 3; ++j)
      b(i, j) = std::complex<double>(dist(rng), dist(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(complex_solve(m, b));
}
BENCHMARK(BM_ComplexSolve6x6);

void BM_BesselK1(benchmark::State& state) {
  double x = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bessel_k1(x));
    x = x < 600.0 ? x * 1.001 : 1e-3;
  }
}
BENCHMARK(BM_BesselK1);

void BM_MatchedFilterSnr(benchmark::State& state) {
  const DetectorCase c = make_case(CaseKind::MmVoltage);
  const DetectorParams p(mm_reference());
  const auto cav = sql_cavity(c, p);
  DmEncounter e;
  e.m = 1e-3;
  e.m_dm = constants::planck_mass;
  e.b = 1e-3;
  e.v = 2e5;
  const auto psd = [&](double nu) {
    return psd_closed_form(c, p, cav, {}, nu).total;
  };
  for (auto _ : state) benchmark::DoNotOptimize(snr_opt(e, psd));
}
BENCHMARK(BM_MatchedFilterSnr);

void BM_Equilibrium(benchmark::State& state) {
  ElectroMechParams p;
  p.m = 1e-3;
  p.k = 100.0;
  p.A = 1e-4;
  p.d0 = 1e-5;
  p.V_DC = 2.0;
  p.C_P = 25e-15;
  p.L = 1e-5;
  for (auto _ : state) benchmark::DoNotOptimize(find_equilibrium(p));
}
BENCHMARK(BM_Equilibrium);

}  // namespace

BENCHMARK_MAIN();
