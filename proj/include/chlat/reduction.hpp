#pragma once

#include <complex>
#include <vector>

#include "chlat/lattice.hpp"
#include "chlat/spectrum.hpp"

namespace chlat {

enum class ReductionCase {
  Mult2,
  Mult4,
  Mult6NonResonant,
  Mult6ResonantEven,
  LongRangeMult2,
  Mult6ResonantGeneral,  // integration only, never classified
};

const char* case_name(ReductionCase c);

// Exponential: amplitudes y_{2p}, y_{2p+1} multiply e^{+i k_p x}, e^{-i k_p x}.
// Cosine: amplitude y_p multiplies cos(k_p x) (even fields).
enum class Basis { Exponential, Cosine };

// Which lambda enters the slaved-mode denominators.
enum class LambdaMode { Actual, Critical };

struct Monomial {
  int i = 0;
  int j = 0;  // i <= j, indices into the unstable amplitude vector
};

struct ManifoldCoefficient {
  WaveIndex target;  // representative of the target pair in the cosine basis
  Monomial monomial;
  double value = 0.0;
};

struct ManifoldExpansion {
  Basis basis = Basis::Exponential;
  std::vector<WaveIndex> unstable;  // mode attached to each amplitude slot
  std::vector<ManifoldCoefficient> terms;
};

struct ReducedCoefficients {
  ReductionCase reduction_case = ReductionCase::Mult2;
  double beta = 0.0;
  double xi = 0.0;     // self interaction (equal to eta for single-pair cases)
  double eta = 0.0;    // single-pair coefficient, or pair (1,2) cross interaction
  double chi = 0.0;    // pair (1,3)
  double omega = 0.0;  // pair (2,3)
  double tau = 0.0;    // quadratic resonant coupling
  double a_constant = 0.0;
  double norm2 = 0.0;  // |k_1^c|^2
  double lambda = 0.0;
  double lambda_manifold = 0.0;
  int pairs = 1;
};

ReductionCase reduction_case(const CriticalSet& cs, const ModelParams& params);

ManifoldExpansion manifold_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                        const ModelParams& params,
                                        LambdaMode mode = LambdaMode::Actual);

// Slaved amplitude at one target: sum of matching terms times the monomials of y.
std::complex<double> evaluate_manifold(const ManifoldExpansion& m, const WaveIndex& target,
                                       const std::vector<std::complex<double>>& y);

// Numerical quadrature of the slaved-mode projection at quadratic order.
// The basis follows manifold_coefficients for the same inputs.
std::complex<double> manifold_quadrature_oracle(const CriticalSet& cs, const DualLattice& dual,
                                                const ModelParams& params,
                                                const WaveIndex& target,
                                                const std::vector<std::complex<double>>& y,
                                                int grid = 0);

ReducedCoefficients reduced_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                         const ModelParams& params,
                                         LambdaMode mode = LambdaMode::Actual);

// Coefficients of the resonant system without the evenness restriction, in
// complex amplitudes Z_p of e^{i k_p x}. Supported for integration only.
ReducedCoefficients general_resonant_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                                  const ModelParams& params,
                                                  LambdaMode mode = LambdaMode::Actual);

}  // namespace chlat
