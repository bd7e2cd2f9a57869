#pragma once

#include <string>
#include <vector>

#include "chlat/reduction.hpp"
#include "chlat/symeig.hpp"

namespace chlat {

enum class Pattern { Trivial, Roll, SquareTorus, MixedTorus, TripleTorus, Hexagon, Rectangle };
const char* pattern_name(Pattern p);

enum class Stability { Stable, Saddle, Unstable, Marginal, Unknown };
const char* stability_name(Stability s);

struct Equilibrium {
  std::string label;                // p1, p2, ..., or +p1/-p1, p4+, ...
  std::vector<double> coordinates;  // r per pair, or cosine amplitudes y
  Pattern pattern = Pattern::Trivial;
  std::vector<double> jacobian_eigenvalues;
  Stability stability = Stability::Unknown;
  int unstable_count = 0;
  std::vector<std::vector<double>> unstable_directions;
  bool far_field = false;
  bool near_origin = true;  // inside the validity ball
};

struct EquilibriumSet {
  std::vector<Equilibrium> states;  // trivial state first
  std::vector<std::string> notes;
};

// Vector field and Jacobian of the reduced system in the coordinates of
// Equilibrium::coordinates.
std::vector<double> reduced_field(const ReducedCoefficients& rc, const std::vector<double>& c);
Matrix reduced_jacobian(const ReducedCoefficients& rc, const std::vector<double>& c);

// Radius of the ball in which the local reduction is trusted.
double validity_radius(const ReducedCoefficients& rc);

EquilibriumSet fixed_points(const ReducedCoefficients& rc);

struct JacobianSpectrum {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
  bool closed_form = false;
};

JacobianSpectrum jacobian_spectrum(const ReducedCoefficients& rc, const Equilibrium& eq);

struct RollRegime {
  bool available = false;
  double lower = 0.0;  // xi - |tau| sqrt(-xi/beta)
  double upper = 0.0;  // xi + |tau| sqrt(-xi/beta)
  int regime = 0;      // 1: all stable, 2: one unstable direction, 3: two
};

struct StabilityReport {
  bool pre_transition = false;
  std::vector<Equilibrium> states;
  std::vector<std::string> notes;
  RollRegime rolls;
};

StabilityReport stability_report(const ReducedCoefficients& rc);

}  // namespace chlat
