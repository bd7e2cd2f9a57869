#include "chlat/simulator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "chlat/renderer.hpp"

namespace chlat {

int thread_budget() {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("CH_LATTICE_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void init_fftw_threads() {
  static bool done = [] {
    fftw_init_threads();
    return true;
  }();
  (void)done;
}

int wrap(int n, int M) { return ((n % M) + M) % M; }

}  // namespace

struct PdeStepper::Impl {
  int N = 0;
  int M = 0;
  DualLattice dual;
  ModelParams params;
  double area = 0.0;
  std::vector<double> q;     // |k|^2 per slot
  std::vector<double> beta;  // linear rate per slot
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> u;

  std::size_t slot(int n1, int n2) const {
    return static_cast<std::size_t>(n1 + N) * (2 * N + 1) + static_cast<std::size_t>(n2 + N);
  }
  std::size_t cell(int n1, int n2) const {
    return static_cast<std::size_t>(wrap(n1, M)) * M + static_cast<std::size_t>(wrap(n2, M));
  }

  void to_grid(const SpectralField& f) {
    std::fill(reinterpret_cast<double*>(buf), reinterpret_cast<double*>(buf) + 2 * M * M, 0.0);
    for (int n1 = -N; n1 <= N; ++n1) {
      for (int n2 = -N; n2 <= N; ++n2) {
        const auto& z = f.at(n1, n2);
        auto c = cell(n1, n2);
        buf[c][0] = z.real();
        buf[c][1] = z.imag();
      }
    }
    fftw_execute(bwd);
    for (int i = 0; i < M * M; ++i) u[i] = buf[i][0];
  }

  void from_grid(SpectralField& out) {
    fftw_execute(fwd);
    const double s = 1.0 / (static_cast<double>(M) * M);
    for (int n1 = -N; n1 <= N; ++n1) {
      for (int n2 = -N; n2 <= N; ++n2) {
        auto c = cell(n1, n2);
        out.at(n1, n2) = {buf[c][0] * s, buf[c][1] * s};
      }
    }
  }

  void finish(SpectralField& f) const {
    f.at(0, 0) = 0.0;
    f.enforce_hermitian();
    if (params.even_symmetry) f.project_even();
  }
};

PdeStepper::PdeStepper(int N, const DualLattice& dual, const ModelParams& params, int dealias)
    : impl_(std::make_unique<Impl>()) {
  auto& m = *impl_;
  m.N = N;
  m.M = std::max(4, std::max(2, dealias) * (2 * N + 1));
  m.dual = dual;
  m.params = params;
  m.area = physical_lattice(dual).cell_area();
  const int W = 2 * N + 1;
  m.q.assign(W * W, 0.0);
  m.beta.assign(W * W, 0.0);
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      double q = norm2({n1, n2}, dual);
      m.q[m.slot(n1, n2)] = q;
      m.beta[m.slot(n1, n2)] = eigenvalue_at(q, params.lambda, params.sigma);
    }
  }
  m.u.assign(static_cast<std::size_t>(m.M) * m.M, 0.0);
  std::lock_guard<std::mutex> lock(plan_mutex());
  init_fftw_threads();
  // Threads only pay off on large grids.
  fftw_plan_with_nthreads(m.M >= 256 ? thread_budget() : 1);
  m.buf = fftw_alloc_complex(static_cast<std::size_t>(m.M) * m.M);
  m.fwd = fftw_plan_dft_2d(m.M, m.M, m.buf, m.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  m.bwd = fftw_plan_dft_2d(m.M, m.M, m.buf, m.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

PdeStepper::~PdeStepper() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->bwd);
  fftw_free(impl_->buf);
}

int PdeStepper::grid() const { return impl_->M; }
double PdeStepper::cell_area() const { return impl_->area; }

SpectralField PdeStepper::nonlinear(const SpectralField& f) {
  auto& m = *impl_;
  m.to_grid(f);
  const double g2 = m.params.gamma2, g3 = m.params.gamma3;
  for (int i = 0; i < m.M * m.M; ++i) {
    double v = m.u[i];
    m.buf[i][0] = v * v * (g2 + g3 * v);
    m.buf[i][1] = 0.0;
  }
  SpectralField out(m.N);
  m.from_grid(out);
  for (int n1 = -m.N; n1 <= m.N; ++n1)
    for (int n2 = -m.N; n2 <= m.N; ++n2) out.at(n1, n2) *= -m.q[m.slot(n1, n2)];
  out.at(0, 0) = 0.0;
  return out;
}

SpectralField PdeStepper::step_imex1(const SpectralField& f, double dt) {
  auto& m = *impl_;
  SpectralField nl = nonlinear(f);
  SpectralField out(m.N);
  auto& o = out.data();
  const auto& z = f.data();
  const auto& g = nl.data();
  for (std::size_t s = 0; s < o.size(); ++s) o[s] = (z[s] + dt * g[s]) / (1.0 - dt * m.beta[s]);
  m.finish(out);
  return out;
}

SpectralField PdeStepper::step_imex2(const SpectralField& f, const SpectralField& prev, double dt) {
  auto& m = *impl_;
  SpectralField nl = nonlinear(f);
  SpectralField nl_prev = nonlinear(prev);
  SpectralField out(m.N);
  auto& o = out.data();
  const auto& z = f.data();
  const auto& zp = prev.data();
  const auto& g = nl.data();
  const auto& gp = nl_prev.data();
  for (std::size_t s = 0; s < o.size(); ++s) {
    o[s] = (4.0 * z[s] - zp[s] + 2.0 * dt * (2.0 * g[s] - gp[s])) / (3.0 - 2.0 * dt * m.beta[s]);
  }
  m.finish(out);
  return out;
}

PdeStepper::Measure PdeStepper::measure(const SpectralField& f) {
  auto& m = *impl_;
  // Quadratic part by Parseval; polynomial part on the dealiased grid, which
  // integrates the quartic exactly.
  double quad = 0.0;
  for (int n1 = -m.N; n1 <= m.N; ++n1) {
    for (int n2 = -m.N; n2 <= m.N; ++n2) {
      if (n1 == 0 && n2 == 0) continue;
      double q = m.q[m.slot(n1, n2)];
      double a2 = std::norm(f.at(n1, n2));
      quad += 0.5 * (q - m.params.lambda) * a2;
      if (m.params.sigma > 0.0) quad += 0.5 * m.params.sigma * a2 / q;
    }
  }
  m.to_grid(f);
  double poly = 0.0, sup = 0.0;
  const double g2 = m.params.gamma2 / 3.0, g3 = m.params.gamma3 / 4.0;
  for (int i = 0; i < m.M * m.M; ++i) {
    double v = m.u[i];
    poly += v * v * v * (g2 + g3 * v);
    sup = std::max(sup, std::abs(v));
  }
  return {m.area * (quad + poly / (static_cast<double>(m.M) * m.M)), sup};
}

SpectralField step_pde(const SpectralField& field, const DualLattice& dual,
                       const ModelParams& params, double dt) {
  PdeStepper st(field.truncation(), dual, params);
  return st.step_imex1(field, dt);
}

SpectralField initial_field(const SimConfig& config, const DualLattice& dual,
                            const CriticalSet& cs, const ModelParams& params) {
  SpectralField f(config.N);
  switch (config.init) {
    case InitKind::Explicit:
      f = config.init_field.resized(config.N);
      break;
    case InitKind::FromEquilibrium:
      f = synthesize_stationary(config.init_equilibrium, cs, config.init_phases).resized(config.N);
      break;
    case InitKind::RandomSmall: {
      std::mt19937_64 rng(config.seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      int Ni = std::min(config.N, std::max(1, 2 * cs.max_index()));
      for (int n1 = 0; n1 <= Ni; ++n1) {
        for (int n2 = -Ni; n2 <= Ni; ++n2) {
          if (n1 == 0 && n2 <= 0) continue;
          double re = uni(rng), im = uni(rng);
          f.at(n1, n2) = {re, im};
          f.at(-n1, -n2) = {re, -im};
        }
      }
      break;
    }
  }
  f.enforce_hermitian();
  if (params.even_symmetry) f.project_even();
  if (config.init == InitKind::RandomSmall) {
    PdeStepper st(config.N, dual, params, config.dealias);
    double sup = st.sup_norm(f);
    if (sup > 0.0) {
      for (auto& z : f.data()) z *= config.init_amplitude / sup;
    }
  }
  return f;
}

namespace {

std::vector<double> pair_amplitudes(const SpectralField& f, const CriticalSet& cs) {
  std::vector<double> a;
  for (const auto& r : cs.representatives) {
    a.push_back(f.in_range(r) ? std::abs(f.at(r)) + std::abs(f.at(-r)) : 0.0);
  }
  return a;
}

bool finite_field(const SpectralField& f, double guard) {
  for (const auto& z : f.data()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > guard) return false;
  }
  return true;
}

}  // namespace

SimResult run_pde(const SimConfig& config, const DualLattice& dual, const ModelParams& params,
                  const CriticalSet& cs) {
  if (!(config.dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "dt must be positive");
  if (config.N < 4 * cs.max_index()) {
    throw Error(ErrorCode::InvalidParameter, "truncation must be at least 4x the critical index");
  }
  PdeStepper st(config.N, dual, params, config.dealias);
  SimResult res;
  SpectralField z = initial_field(config, dual, cs, params);
  SpectralField prev;
  bool have_prev = false;
  double prev_h = 0.0;

  auto m0 = st.measure(z);
  double F = m0.energy;
  res.diagnostics.initial_sup = m0.sup_norm;
  res.diagnostics.grid = st.grid();
  const double radius =
      m0.sup_norm > 0.0 ? std::min(config.escape_factor * m0.sup_norm, config.escape_cap)
                        : config.escape_cap;
  const double guard = 1e6;

  double t = 0.0, dt = config.dt;
  auto record = [&](double time, const SpectralField& f, double energy) {
    res.amplitude_history.push_back({time, pair_amplitudes(f, cs)});
    res.energy_history.push_back({time, energy});
  };
  record(0.0, z, F);
  bool recorded_last = true;
  double sup = m0.sup_norm;

  const double t_stop = config.t_end * (1.0 - 1e-12);
  while (t < t_stop) {
    double h = std::min(dt, config.t_end - t);
    SpectralField z1 = (config.scheme == Scheme::IMEX2 && have_prev && h == prev_h)
                           ? st.step_imex2(z, prev, h)
                           : st.step_imex1(z, h);
    bool ok = finite_field(z1, guard);
    PdeStepper::Measure m1{};
    if (ok) m1 = st.measure(z1);
    double tol = 1e-8 * std::abs(F) + 1e-12;
    if (!ok || !(m1.energy <= F + tol)) {
      if (res.diagnostics.halvings >= config.max_halvings) {
        throw Error(ErrorCode::BlowUp, ok ? "free energy increases after the maximum number of step halvings"
                                          : "amplitudes overflow after the maximum number of step halvings");
      }
      ++res.diagnostics.halvings;
      dt *= 0.5;
      have_prev = false;
      continue;
    }
    prev = std::move(z);
    z = std::move(z1);
    have_prev = true;
    prev_h = h;
    t += h;
    ++res.diagnostics.steps;
    double herm = z.hermitian_violation();
    double mean = std::abs(z.at(0, 0));
    res.diagnostics.max_hermitian_violation = std::max(res.diagnostics.max_hermitian_violation, herm);
    res.diagnostics.max_mean_mode = std::max(res.diagnostics.max_mean_mode, mean);
    if (config.observer) config.observer({t, h, m1.energy, F, mean, herm, m1.sup_norm});
    F = m1.energy;
    sup = m1.sup_norm;
    recorded_last = false;
    if (res.diagnostics.steps % std::max(1, config.record_every) == 0) {
      record(t, z, F);
      recorded_last = true;
    }
    if (sup >= radius) {
      res.escape_flag = true;
      res.escape_time = t;
      break;
    }
  }
  if (!recorded_last) record(t, z, F);
  res.final_time = t;
  res.diagnostics.final_dt = dt;
  res.diagnostics.final_sup = sup;
  res.final_field = std::move(z);
  return res;
}

int reduced_state_size(const ReducedCoefficients& rc) {
  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
    case ReductionCase::LongRangeMult2: return 2;
    case ReductionCase::Mult4: return 4;
    case ReductionCase::Mult6NonResonant: return 6;
    case ReductionCase::Mult6ResonantEven: return 3;
    case ReductionCase::Mult6ResonantGeneral: return 6;
  }
  return 0;
}

std::vector<double> reduced_rhs(const ReducedCoefficients& rc, const std::vector<double>& s) {
  using cd = std::complex<double>;
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven) return reduced_field(rc, s);
  const int P = reduced_state_size(rc) / 2;
  std::vector<cd> Z(P);
  for (int p = 0; p < P; ++p) Z[p] = {s[2 * p], s[2 * p + 1]};
  double self = (P == 1) ? rc.eta : rc.xi;
  double c[3][3] = {{0, rc.eta, rc.chi}, {rc.eta, 0, rc.omega}, {rc.chi, rc.omega, 0}};
  std::vector<cd> dZ(P);
  for (int p = 0; p < P; ++p) {
    double g = rc.beta + self * std::norm(Z[p]);
    for (int q = 0; q < P; ++q) {
      if (q != p) g += c[p][q] * std::norm(Z[q]);
    }
    dZ[p] = g * Z[p];
  }
  if (rc.reduction_case == ReductionCase::Mult6ResonantGeneral) {
    dZ[0] -= rc.tau * std::conj(Z[1]) * Z[2];
    dZ[1] -= rc.tau * std::conj(Z[0]) * Z[2];
    dZ[2] -= rc.tau * Z[0] * Z[1];
  }
  std::vector<double> out(2 * P);
  for (int p = 0; p < P; ++p) {
    out[2 * p] = dZ[p].real();
    out[2 * p + 1] = dZ[p].imag();
  }
  return out;
}

std::vector<double> radial_coordinates(const ReducedCoefficients& rc, const std::vector<double>& s) {
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven) return s;
  std::vector<double> r;
  for (std::size_t p = 0; 2 * p + 1 < s.size(); ++p) r.push_back(std::hypot(s[2 * p], s[2 * p + 1]));
  return r;
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

}  // namespace

Trajectory run_reduced(const ReducedCoefficients& rc, const std::vector<double>& y0, double dt,
                       double t_end, int record_every) {
  const int n = reduced_state_size(rc);
  if (static_cast<int>(y0.size()) != n) throw Error(ErrorCode::InvalidParameter, "reduced state size mismatch");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "dt must be positive");
  Trajectory tr;
  std::vector<double> y = y0;
  tr.times.push_back(0.0);
  tr.states.push_back(y);
  auto axpy = [n](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> o(n);
    for (int i = 0; i < n; ++i) o[i] = a[i] + s * b[i];
    return o;
  };
  long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  double h = steps > 0 ? t_end / steps : 0.0;
  for (long k = 1; k <= steps; ++k) {
    auto k1 = reduced_rhs(rc, y);
    auto k2 = reduced_rhs(rc, axpy(y, 0.5 * h, k1));
    auto k3 = reduced_rhs(rc, axpy(y, 0.5 * h, k2));
    auto k4 = reduced_rhs(rc, axpy(y, h, k3));
    for (int i = 0; i < n; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    double norm = 0.0;
    for (double v : y) norm = std::max(norm, std::abs(v));
    if (!std::isfinite(norm) || norm > 1e8) {
      throw Error(ErrorCode::BlowUp, "reduced trajectory diverged");
    }
    if (k % std::max(1, record_every) == 0 || k == steps) {
      tr.times.push_back(k * h);
      tr.states.push_back(y);
    }
  }
  tr.final_state = y;
  tr.final_radial = radial_coordinates(rc, y);
  if (rc.reduction_case != ReductionCase::Mult6ResonantGeneral) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : fixed_points(rc).states) {
      double d = distance(e.coordinates, tr.final_radial);
      if (d < best) {
        best = d;
        tr.nearest = e.label;
      }
    }
    tr.nearest_distance = best;
  }
  return tr;
}

std::vector<double> observed_coordinates(const SpectralField& f, const CriticalSet& cs,
                                         const ModelParams& params) {
  std::vector<double> c;
  bool cosine = cs.resonance == Resonance::Mult6Resonant && params.even_symmetry;
  for (const auto& r : cs.representatives) {
    if (cosine) c.push_back(2.0 * f.at(r).real());
    else c.push_back(std::abs(f.at(r)));
  }
  return c;
}

namespace {

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// In the even resonant case flipping two signs is a translation.
std::vector<std::vector<double>> images(const std::vector<double>& c, bool cosine) {
  std::vector<std::vector<double>> out{c};
  if (!cosine) return out;
  for (int k = 0; k < 3; ++k) {
    auto v = c;
    v[(k + 1) % 3] = -v[(k + 1) % 3];
    v[(k + 2) % 3] = -v[(k + 2) % 3];
    out.push_back(v);
  }
  return out;
}

}  // namespace

CompareReport compare_full_vs_reduced(const CriticalSet& cs, const DualLattice& dual,
                                      const ModelParams& base,
                                      const std::vector<double>& lambda_factors,
                                      const SimConfig& config) {
  CompareReport rep;
  bool cosine = cs.resonance == Resonance::Mult6Resonant && base.even_symmetry;
  ModelParams at0 = base;
  at0.lambda = cs.lambda0;
  auto verdict = classify(reduced_coefficients(cs, dual, at0, LambdaMode::Critical), at0);
  if (verdict.transition_type != TransitionType::TypeI) {
    throw Error(ErrorCode::UnsupportedCase, "comparison requires a continuous (TypeI) transition");
  }
  std::vector<double> lx, ly;
  for (double factor : lambda_factors) {
    ModelParams p = base;
    p.lambda = cs.lambda0 * factor;
    CompareEntry e;
    e.lambda = p.lambda;
    e.excess = p.lambda - cs.lambda0;
    if (!(e.excess > 0.0) || e.excess > 0.02 * cs.lambda0 * (1.0 + 1e-12)) {
      throw Error(ErrorCode::InvalidParameter, "lambda must lie in (lambda0, 1.02 lambda0]");
    }
    SimResult sim = run_pde(config, dual, p, cs);
    if (sim.escape_flag) throw Error(ErrorCode::NotConverged, "PDE left the neighbourhood of the basic state");
    const auto& h = sim.amplitude_history;
    if (h.size() >= 2) {
      double a1 = norm_of(h[h.size() - 1].pairs), a0 = norm_of(h[h.size() - 2].pairs);
      double span = h[h.size() - 1].t - h[h.size() - 2].t;
      e.drift = span > 0.0 && a1 > 0.0 ? std::abs(a1 - a0) / (a1 * span) : 0.0;
    }
    if (e.drift > 1e-6) throw Error(ErrorCode::NotConverged, "PDE amplitudes still drifting");
    e.observed = observed_coordinates(sim.final_field, cs, p);
    auto rep_eq = stability_report(reduced_coefficients(cs, dual, p, LambdaMode::Actual));
    double best = std::numeric_limits<double>::infinity();
    for (const auto& eq : rep_eq.states) {
      if (eq.pattern == Pattern::Trivial) continue;
      for (const auto& img : images(eq.coordinates, cosine)) {
        double d = distance(img, e.observed);
        if (d < best) {
          best = d;
          e.predicted = img;
          e.branch = eq.label;
        }
      }
    }
    e.observed_norm = norm_of(e.observed);
    e.predicted_norm = norm_of(e.predicted);
    e.relative_error = e.predicted_norm > 0.0 ? best / e.predicted_norm : best;
    lx.push_back(std::log(e.excess));
    ly.push_back(std::log(e.observed_norm));
    rep.entries.push_back(e);
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    rep.exponent = sxy / sxx;
  }
  return rep;
}

}  // namespace chlat
