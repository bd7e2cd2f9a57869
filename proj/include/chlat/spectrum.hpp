#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "chlat/lattice.hpp"

namespace chlat {

struct ModelParams {
  double lambda = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 1.0;
  double sigma = 0.0;
  bool even_symmetry = false;
};

// -q^2 + lambda q - sigma for a mode with |k|^2 = q.
inline double eigenvalue_at(double q, double lambda, double sigma) {
  return -q * q + lambda * q - sigma;
}

double eigenvalue(const WaveIndex& n, const DualLattice& dual, const ModelParams& params);

struct PesReport {
  bool passed = false;
  double worst_on_shell = 0.0;   // max |beta| over S at lambda0
  double max_off_shell = 0.0;    // largest beta outside S at lambda0 (negative on pass)
  WaveIndex max_off_index;
  double min_flip = 0.0;         // min over S of beta(lambda0+d) and -beta(lambda0-d)
  int probe_radius = 0;
};

// Throws PesViolation naming the offending index when any check fails.
PesReport verify_pes(const CriticalSet& cs, const DualLattice& dual,
                     const std::function<ModelParams(double)>& params_at,
                     int probe_radius = 0);

std::vector<std::pair<WaveIndex, double>> growth_ordering(const DualLattice& dual,
                                                          const ModelParams& params,
                                                          int count);

}  // namespace chlat
