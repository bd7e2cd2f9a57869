#pragma once

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <string>
#include <vector>

#include "chlat/common.hpp"

namespace chlat {

struct LatticeSpec {
  Vec2 l1;
  Vec2 l2;

  double cell_area() const { return std::abs(l1.cross(l2)); }
};

struct DualLattice {
  Vec2 k1;
  Vec2 k2;
};

struct WaveIndex {
  int n1 = 0;
  int n2 = 0;

  auto operator<=>(const WaveIndex&) const = default;
  WaveIndex operator-() const { return {-n1, -n2}; }
  WaveIndex operator+(const WaveIndex& o) const { return {n1 + o.n1, n2 + o.n2}; }
  WaveIndex operator-(const WaveIndex& o) const { return {n1 - o.n1, n2 - o.n2}; }
  WaveIndex operator*(int s) const { return {s * n1, s * n2}; }
  bool is_zero() const { return n1 == 0 && n2 == 0; }
  int max_abs() const { return std::max(std::abs(n1), std::abs(n2)); }
  std::string str() const;
};

enum class Resonance { Mult2, Mult4, Mult6NonResonant, Mult6Resonant, OutOfModel };

const char* resonance_name(Resonance r);

struct CriticalSet {
  std::vector<WaveIndex> members;          // the full set S, sorted
  int multiplicity = 0;
  std::vector<WaveIndex> representatives;  // one per +/- pair, k_1^c first
  std::vector<Vec2> critical_vectors;
  double norm2 = 0.0;                      // shared |k|^2 of the shell
  double lambda0 = 0.0;
  double sigma = 0.0;
  Resonance resonance = Resonance::OutOfModel;
  bool certified_minimal = false;          // false for prescribed shells

  bool contains(const WaveIndex& n) const;
  int max_index() const;
};

Vec2 cartesian(const WaveIndex& n, const DualLattice& dual);
double norm2(const WaveIndex& n, const DualLattice& dual);

DualLattice dual_lattice(const LatticeSpec& spec);
LatticeSpec physical_lattice(const DualLattice& dual);

// Shell objective: |k|^2 for sigma = 0, |k|^2 + sigma/|k|^2 otherwise.
double shell_objective(double q, double sigma);

CriticalSet minimal_shell(const DualLattice& dual, double sigma = 0.0,
                          int search_radius = 8);

// Builds a critical set from prescribed representatives without checking
// minimality. Used for synthetic geometries that no lattice realizes as a
// minimal shell.
CriticalSet prescribed_shell(const DualLattice& dual,
                             const std::vector<WaveIndex>& representatives,
                             double sigma = 0.0);

Resonance detect_resonance(const CriticalSet& cs);

// Throws CardinalityOutOfModel when the shell cannot be reduced.
void require_in_model(const CriticalSet& cs);

struct ScaledParams {
  double lambda = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
};

ScaledParams nondimensionalize(double mu, double D, double RT, double a,
                               double u0, double l);

}  // namespace chlat
