#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "chlat/simulator.hpp"
#include "test_support.hpp"

using namespace chlat;
using cd = std::complex<double>;

namespace {

DualLattice unit_mult2() {
  // Skew lattice whose shell is the single pair +/-(k2 - k1), scaled to |k_c| = 1.
  DualLattice d{{50, 0}, {25 * std::sqrt(3.0), 25}};
  double s = 1.0 / (d.k2 - d.k1).norm();
  return {d.k1 * s, d.k2 * s};
}

DualLattice unit_hex() { return {{1, 0}, {-0.5, -std::sqrt(3.0) / 2}}; }

SimConfig quick(int N, double dt, double t_end) {
  SimConfig c;
  c.N = N;
  c.dt = dt;
  c.t_end = t_end;
  c.record_every = 1;
  return c;
}

}  // namespace

TEST(StepPde, ZeroFieldStaysZero) {
  auto d = unit_mult2();
  SpectralField f(8);
  auto g = step_pde(f, d, {2.0, 1.0, 1.0}, 0.1);
  EXPECT_EQ(g.max_abs(), 0.0);
}

TEST(StepPde, LinearModeMatchesImplicitEuler) {
  auto d = unit_mult2();
  ModelParams p{1.3, 0.0, 0.0};
  SpectralField f(8);
  WaveIndex n{2, -1};
  f.at(n) = {0.3, -0.2};
  f.at(-n) = std::conj(f.at(n));
  double beta = eigenvalue(n, d, p);
  cd want = f.at(n);
  PdeStepper st(8, d, p);
  for (int k = 0; k < 25; ++k) {
    f = st.step_imex1(f, 0.05);
    want /= (1.0 - 0.05 * beta);
  }
  EXPECT_NEAR(std::abs(f.at(n) - want), 0.0, 1e-15);
  EXPECT_NEAR(f.max_abs(), std::abs(want), 1e-15);
}

TEST(StepPde, NonlinearTermMatchesDirectConvolution) {
  auto d = unit_mult2();
  ModelParams p{1.0, 0.7, 1.3};
  SpectralField f(4);
  std::mt19937_64 rng(197);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) f.at(a, b) = {u(rng), u(rng)};
  f.enforce_hermitian();
  // Direct spectral products, all within |n| <= 6.
  auto conv = [](const std::map<std::pair<int, int>, cd>& x, const std::map<std::pair<int, int>, cd>& y) {
    std::map<std::pair<int, int>, cd> out;
    for (const auto& [i, a] : x)
      for (const auto& [j, b] : y) out[{i.first + j.first, i.second + j.second}] += a * b;
    return out;
  };
  std::map<std::pair<int, int>, cd> z;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) z[{a, b}] = f.at(a, b);
  auto z2 = conv(z, z), z3 = conv(z2, z);
  PdeStepper st(4, d, p);
  auto nl = st.nonlinear(f);
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      double q = norm2({a, b}, d);
      cd want = -q * (p.gamma2 * z2[{a, b}] + p.gamma3 * z3[{a, b}]);
      EXPECT_NEAR(std::abs(nl.at(a, b) - want), 0.0, 1e-14) << a << "," << b;
    }
}

TEST(RunPde, BelowThresholdDecays) {
  auto d = unit_mult2();
  auto cs = minimal_shell(d);
  ModelParams p{0.95 * cs.lambda0, 0.5, 1.0};
  auto cfg = quick(8, 0.5, 200);
  cfg.init_amplitude = 1e-2;
  double prev = 1e300;
  int drops = 0, steps = 0;
  cfg.observer = [&](const StepInfo& s) {
    ++steps;
    if (s.t > 20 && s.sup_norm <= prev) ++drops;
    if (s.t > 20) EXPECT_LE(s.sup_norm, prev * (1 + 1e-12));
    prev = s.t > 20 ? s.sup_norm : 1e300;
  };
  auto res = run_pde(cfg, d, p, cs);
  EXPECT_FALSE(res.escape_flag);
  EXPECT_LT(res.diagnostics.final_sup, 1e-2 * res.diagnostics.initial_sup);
  EXPECT_GT(drops, 0);
}

TEST(RunPde, StructureInvariants) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  ModelParams p{1.02 * cs.lambda0, 0.3, 1.0};
  auto cfg = quick(16, 0.5, 60);
  cfg.scheme = Scheme::IMEX2;
  cfg.init_amplitude = 0.05;
  int steps = 0;
  cfg.observer = [&](const StepInfo& s) {
    ++steps;
    EXPECT_EQ(s.mean_mode, 0.0);
    EXPECT_LT(s.hermitian_violation, 1e-12);
    EXPECT_LE(s.energy, s.energy_before + 1e-8 * std::abs(s.energy_before) + 1e-12);
  };
  auto res = run_pde(cfg, d, p, cs);
  EXPECT_GT(steps, 0);
  EXPECT_EQ(res.final_field.at(0, 0), 0.0);
  EXPECT_LT(res.final_field.hermitian_violation(), 1e-12);
  for (std::size_t i = 1; i < res.energy_history.size(); ++i) {
    double a = res.energy_history[i - 1].energy, b = res.energy_history[i].energy;
    EXPECT_LE(b, a + 1e-8 * std::abs(a) + 1e-12);
  }
}

TEST(RunPde, EnergyMatchesGridQuadrature) {
  // Independent evaluation of the free energy by pointwise sums at the physical
  // level: 1/2 |grad u|^2 - lambda/2 u^2 + gamma2/3 u^3 + gamma3/4 u^4 averaged over
  // a fine grid and multiplied by the cell area.
  auto d = unit_mult2();
  ModelParams p{1.1, 0.4, 0.9};
  SpectralField f(3);
  std::mt19937_64 rng(199);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) f.at(a, b) = {u(rng), u(rng)};
  f.enforce_hermitian();
  PdeStepper st(3, d, p);
  double got = st.energy(f);
  const int M = 40;
  auto cell = physical_lattice(d);
  double sum = 0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      Vec2 x = cell.l1 * (double(i) / M) + cell.l2 * (double(j) / M);
      double v = 0;
      Vec2 g;
      for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) {
          Vec2 k = cartesian({a, b}, d);
          cd e = f.at(a, b) * std::polar(1.0, k.dot(x));
          v += e.real();
          g = g + k * (-e.imag());
        }
      sum += 0.5 * g.norm2() - 0.5 * p.lambda * v * v + p.gamma2 / 3 * v * v * v + p.gamma3 / 4 * v * v * v * v;
    }
  double want = sum / (M * M) * cell.cell_area();
  EXPECT_NEAR(got, want, 1e-11 * std::abs(want));
}

TEST(RunPde, SpectralAccuracyLinear) {
  // u0 = exp(cos(2 pi s1)) - I0(1): coefficients I_n(1). The linear scheme damps each
  // mode by (1 - dt beta)^-steps; the truncated field's error is the neglected tail.
  auto d = unit_mult2();
  ModelParams p{0.5, 0.0, 0.0};
  const double dt = 0.01;
  const int steps = 10;
  auto exact_at = [&](double s1, int Nmax) {
    double v = 0;
    for (int n = -Nmax; n <= Nmax; ++n) {
      if (n == 0) continue;
      double beta = eigenvalue({n, 0}, d, p);
      v += std::cyl_bessel_i(std::abs(n), 1.0) * std::pow(1.0 - dt * beta, -steps) * std::cos(2 * kPi * n * s1);
    }
    return v;
  };
  double reference = exact_at(0.3, 40);
  double prev_err = 1e300;
  for (int N : {2, 4, 6, 8}) {
    SpectralField f(N);
    // Coefficients by quadrature on a fine grid, not by the Bessel formula.
    const int Q = 256;
    for (int n = -N; n <= N; ++n) {
      if (n == 0) continue;
      cd c = 0;
      for (int j = 0; j < Q; ++j) c += std::exp(std::cos(2 * kPi * j / Q)) * std::polar(1.0, -2 * kPi * n * j / double(Q));
      f.at(n, 0) = c / double(Q);
    }
    f.enforce_hermitian();
    PdeStepper st(N, d, p);
    for (int k = 0; k < steps; ++k) f = st.step_imex1(f, dt);
    double v = 0;
    for (int n = -N; n <= N; ++n) v += (f.at(n, 0) * std::polar(1.0, 2 * kPi * n * 0.3)).real();
    double err = std::abs(v - reference);
    if (prev_err > 1e-14) EXPECT_LT(err, 0.05 * prev_err) << "N=" << N;
    prev_err = err;
  }
  EXPECT_LT(prev_err, 1e-12);
}

TEST(RunPde, SchemeOrders) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  ModelParams p{1.5, 0.5, 1.0};
  SimConfig base = quick(8, 0.1, 2.0);
  base.init_amplitude = 0.2;
  base.seed = 5;
  auto run = [&](Scheme s, double dt) {
    SimConfig c = base;
    c.scheme = s;
    c.dt = dt;
    return run_pde(c, d, p, cs).final_field;
  };
  auto ref = run(Scheme::IMEX2, 0.1 / 64);
  auto dist = [&](const SpectralField& a) {
    double m = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - ref.data()[i]));
    return m;
  };
  double e1a = dist(run(Scheme::IMEX1, 0.1)), e1b = dist(run(Scheme::IMEX1, 0.05));
  double e2a = dist(run(Scheme::IMEX2, 0.1)), e2b = dist(run(Scheme::IMEX2, 0.05));
  EXPECT_NEAR(std::log2(e1a / e1b), 1.0, 0.2);
  EXPECT_NEAR(std::log2(e2a / e2b), 2.0, 0.3);
}

TEST(RunPde, ZeroEndTimeSnapshot) {
  auto d = unit_mult2();
  auto cs = minimal_shell(d);
  auto cfg = quick(8, 0.1, 0.0);
  auto res = run_pde(cfg, d, {1.1, 0.0, 1.0}, cs);
  EXPECT_EQ(res.diagnostics.steps, 0);
  EXPECT_EQ(res.amplitude_history.size(), 1u);
  EXPECT_NEAR(res.diagnostics.initial_sup, cfg.init_amplitude, 1e-15);
}

TEST(RunPde, Deterministic) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  auto cfg = quick(8, 0.2, 5);
  cfg.seed = 42;
  auto a = run_pde(cfg, d, {1.1, 0.3, 1.0}, cs);
  auto b = run_pde(cfg, d, {1.1, 0.3, 1.0}, cs);
  EXPECT_EQ(a.final_field.data(), b.final_field.data());
  cfg.seed = 43;
  auto c = run_pde(cfg, d, {1.1, 0.3, 1.0}, cs);
  EXPECT_NE(a.final_field.data(), c.final_field.data());
}

TEST(RunPde, RejectsCoarseTruncation) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  auto cfg = quick(2, 0.1, 1);
  cs.members.push_back({2, 0});  // forces max index 2, needs N >= 8
  EXPECT_THROW(run_pde(cfg, d, {1.1, 0, 1}, cs), Error);
}

TEST(RunPde, MultTwoSettlesOnReducedAmplitude) {
  auto d = unit_mult2();
  auto cs = minimal_shell(d);
  ModelParams p{1.02 * cs.lambda0, 0.2, 1.0};
  auto rc = reduced_coefficients(cs, d, p);
  auto cfg = quick(8, 2.0, 3000);
  cfg.record_every = 50;
  auto res = run_pde(cfg, d, p, cs);
  ASSERT_FALSE(res.escape_flag);
  double want = 2 * std::sqrt(-rc.beta / rc.eta);
  EXPECT_NEAR(res.amplitude_history.back().pairs[0], want, 0.05 * want);
}

TEST(RunPde, MultTwoJumpEscapes) {
  auto d = unit_mult2();
  auto cs = minimal_shell(d);
  ModelParams p{1.01 * cs.lambda0, 1.0, 0.1};
  auto cfg = quick(8, 1.0, 5000);
  cfg.record_every = 100;
  auto res = run_pde(cfg, d, p, cs);
  EXPECT_TRUE(res.escape_flag);
  EXPECT_GT(res.escape_time, 0.0);
}

TEST(RunPde, EvenHexagonRatios) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  ModelParams p{1.01 * cs.lambda0, 0.1, 1.0, 0.0, true};
  auto cfg = quick(8, 2.0, 4000);
  cfg.record_every = 100;
  cfg.seed = 3;
  auto res = run_pde(cfg, d, p, cs);
  ASSERT_FALSE(res.escape_flag);
  auto y = observed_coordinates(res.final_field, cs, p);
  auto rc = reduced_coefficients(cs, d, p);
  auto rep = stability_report(rc);
  // Nearest branch among the listed states and their sign-flip translates.
  std::string best;
  double bd = 1e300;
  for (const auto& e : rep.states) {
    for (int flip = 0; flip < 4; ++flip) {
      auto c = e.coordinates;
      if (flip) {
        c[flip % 3] = -c[flip % 3];
        c[(flip + 1) % 3] = -c[(flip + 1) % 3];
      }
      double dd = 0;
      for (int i = 0; i < 3; ++i) dd += (c[i] - y[i]) * (c[i] - y[i]);
      if (dd < bd) bd = dd, best = e.label;
    }
  }
  ASSERT_TRUE(best == "p4+" || best[0] == '+' || best[0] == '-') << best;
  if (best == "p4+") {
    for (int i = 1; i < 3; ++i) EXPECT_NEAR(std::abs(y[i]) / std::abs(y[0]), 1.0, 0.02);
  }
}

TEST(RunReduced, DiagonalLineInvariant) {
  ReducedCoefficients rc;
  rc.reduction_case = ReductionCase::Mult4;
  rc.beta = 0.5;
  rc.xi = -1;
  rc.eta = -0.3;
  rc.pairs = 2;
  auto tr = run_reduced(rc, {0.01, 0.02, 0.0, std::sqrt(0.0005)}, 0.01, 20);
  for (const auto& s : tr.states) {
    double r1 = std::hypot(s[0], s[1]), r2 = std::hypot(s[2], s[3]);
    EXPECT_NEAR(r1, r2, 1e-12 * (1 + r1));
  }
}

TEST(RunReduced, EquilibriumStationary) {
  ReducedCoefficients rc;
  rc.reduction_case = ReductionCase::Mult6ResonantEven;
  rc.beta = 1;
  rc.xi = -3749.8;
  rc.eta = -7499.5;
  rc.chi = rc.omega = rc.eta;
  rc.tau = -2500;
  rc.pairs = 3;
  auto eq = fixed_points(rc).states;
  for (const auto& e : eq) {
    if (e.label != "p4+") continue;
    auto tr = run_reduced(rc, e.coordinates, 1e-3, 10);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(tr.final_state[i], e.coordinates[i], 1e-9);
    EXPECT_EQ(tr.nearest, "p4+");
  }
}

TEST(RunReduced, MultTwoConvergesToCircle) {
  ReducedCoefficients rc;
  rc.reduction_case = ReductionCase::Mult2;
  rc.beta = 0.3;
  rc.xi = rc.eta = -2;
  auto tr = run_reduced(rc, {0.01, -0.02}, 0.01, 200);
  EXPECT_NEAR(tr.final_radial[0], std::sqrt(0.15), 1e-9);
  EXPECT_EQ(tr.nearest, "p1");
}

TEST(RunReduced, GeneralResonantMatchesEvenOnRealData) {
  auto d = unit_hex();
  auto cs = minimal_shell(d);
  ModelParams p{1.05, 0.4, 1.0, 0.0, true};
  auto even = reduced_coefficients(cs, d, p);
  p.even_symmetry = false;
  auto gen = general_resonant_coefficients(cs, d, p);
  std::vector<double> y{0.03, -0.01, 0.02};
  auto te = run_reduced(even, y, 0.01, 50);
  std::vector<double> z;
  for (double v : y) z.insert(z.end(), {v / 2, 0.0});
  auto tg = run_reduced(gen, z, 0.01, 50);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(2 * tg.final_state[2 * i], te.final_state[i], 1e-10);
    EXPECT_NEAR(tg.final_state[2 * i + 1], 0.0, 1e-12);
  }
}

TEST(Field, FileRoundTrip) {
  SpectralField f(3);
  f.at(1, -2) = {0.1, 1.0 / 3.0};
  f.at(-1, 2) = std::conj(f.at(1, -2));
  DualLattice d{{1.0 / 7.0, 0.2}, {-0.3, std::sqrt(2.0)}};
  auto path = (std::filesystem::temp_directory_path() / "chlat_field_roundtrip.csv").string();
  write_field_file(path, f, d);
  DualLattice back;
  auto g = read_field_file(path, &back);
  EXPECT_EQ(g.data(), f.data());
  EXPECT_EQ(back.k1.x, d.k1.x);
  EXPECT_EQ(back.k2.y, d.k2.y);
  std::filesystem::remove(path);
}

TEST(Field, HermitianProjection) {
  SpectralField f(2);
  f.at(1, 1) = {1, 2};
  f.at(-1, -1) = {3, 4};
  f.at(0, 0) = 5;
  f.enforce_hermitian();
  EXPECT_EQ(f.at(0, 0), 0.0);
  EXPECT_EQ(f.at(1, 1), cd(2, -1));
  EXPECT_EQ(f.hermitian_violation(), 0.0);
}

TEST(Threads, BudgetFromEnvironment) {
  setenv("CH_LATTICE_THREADS", "1", 1);
  EXPECT_EQ(thread_budget(), 1);
  unsetenv("CH_LATTICE_THREADS");
  EXPECT_GE(thread_budget(), 1);
}
