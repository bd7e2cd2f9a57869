#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "chlat/classifier.hpp"
#include "chlat/equilibria.hpp"
#include "chlat/field.hpp"

namespace chlat {

enum class Scheme { IMEX1, IMEX2 };
enum class InitKind { RandomSmall, FromEquilibrium, Explicit };

struct StepInfo {
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double energy_before = 0.0;
  double mean_mode = 0.0;            // |z_00| after the step
  double hermitian_violation = 0.0;  // after the step
  double sup_norm = 0.0;             // max |u| on the grid
};

struct SimConfig {
  int N = 32;
  double dt = 0.1;
  double t_end = 100.0;
  Scheme scheme = Scheme::IMEX1;
  int dealias = 2;
  std::uint64_t seed = 1;
  InitKind init = InitKind::RandomSmall;
  double init_amplitude = 1e-3;
  Equilibrium init_equilibrium;     // FromEquilibrium
  std::vector<double> init_phases;  // FromEquilibrium
  SpectralField init_field;         // Explicit
  int record_every = 10;
  double escape_factor = 1e3;
  double escape_cap = 1e2;
  int max_halvings = 8;
  std::function<void(const StepInfo&)> observer;
};

struct AmplitudeSample {
  double t = 0.0;
  std::vector<double> pairs;  // |z_k| + |z_-k| per critical pair
};

struct EnergySample {
  double t = 0.0;
  double energy = 0.0;
};

struct SimDiagnostics {
  long steps = 0;
  int halvings = 0;
  double final_dt = 0.0;
  double max_hermitian_violation = 0.0;
  double max_mean_mode = 0.0;
  double initial_sup = 0.0;
  double final_sup = 0.0;
  int grid = 0;
};

struct SimResult {
  SpectralField final_field;
  std::vector<AmplitudeSample> amplitude_history;
  std::vector<EnergySample> energy_history;
  bool escape_flag = false;
  double escape_time = 0.0;
  double final_time = 0.0;
  SimDiagnostics diagnostics;
};

// Pseudo-spectral evaluator for one truncation and lattice.
class PdeStepper {
 public:
  PdeStepper(int N, const DualLattice& dual, const ModelParams& params, int dealias = 2);
  ~PdeStepper();
  PdeStepper(const PdeStepper&) = delete;
  PdeStepper& operator=(const PdeStepper&) = delete;

  int grid() const;
  // -|k|^2 times the transform of gamma2 u^2 + gamma3 u^3, truncated to N.
  SpectralField nonlinear(const SpectralField& f);
  SpectralField step_imex1(const SpectralField& f, double dt);
  SpectralField step_imex2(const SpectralField& f, const SpectralField& prev, double dt);
  struct Measure {
    double energy = 0.0;
    double sup_norm = 0.0;
  };
  // Discrete free energy and max |u| from one transform.
  Measure measure(const SpectralField& f);
  double energy(const SpectralField& f) { return measure(f).energy; }
  double sup_norm(const SpectralField& f) { return measure(f).sup_norm; }
  double cell_area() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpectralField step_pde(const SpectralField& field, const DualLattice& dual,
                       const ModelParams& params, double dt);

SpectralField initial_field(const SimConfig& config, const DualLattice& dual,
                            const CriticalSet& cs, const ModelParams& params);

SimResult run_pde(const SimConfig& config, const DualLattice& dual, const ModelParams& params,
                  const CriticalSet& cs);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<double> final_state;
  std::vector<double> final_radial;  // r per pair, or y for the even case
  std::string nearest;               // label of the nearest fixed point
  double nearest_distance = 0.0;
};

// Reduced state: (Re, Im) per complex pair amplitude, or the cosine
// amplitudes y for the even resonant case.
int reduced_state_size(const ReducedCoefficients& rc);
std::vector<double> reduced_rhs(const ReducedCoefficients& rc, const std::vector<double>& s);
std::vector<double> radial_coordinates(const ReducedCoefficients& rc, const std::vector<double>& s);

Trajectory run_reduced(const ReducedCoefficients& rc, const std::vector<double>& y0, double dt,
                       double t_end, int record_every = 1);

struct CompareEntry {
  double lambda = 0.0;
  double excess = 0.0;  // lambda - lambda0
  std::vector<double> observed;
  std::vector<double> predicted;
  std::string branch;
  double observed_norm = 0.0;
  double predicted_norm = 0.0;
  double relative_error = 0.0;
  double drift = 0.0;
};

struct CompareReport {
  std::vector<CompareEntry> entries;
  double exponent = 0.0;  // slope of log amplitude against log excess
};

// Observed reduced coordinates of a PDE state: r per pair, or signed cosine
// amplitudes in the even resonant case.
std::vector<double> observed_coordinates(const SpectralField& f, const CriticalSet& cs,
                                         const ModelParams& params);

CompareReport compare_full_vs_reduced(const CriticalSet& cs, const DualLattice& dual,
                                      const ModelParams& base,
                                      const std::vector<double>& lambda_factors,
                                      const SimConfig& config);

// Cap on internal threads from CH_LATTICE_THREADS (default: hardware).
int thread_budget();

}  // namespace chlat
