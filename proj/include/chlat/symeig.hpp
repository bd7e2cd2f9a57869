#pragma once

#include <vector>

namespace chlat {

using Matrix = std::vector<std::vector<double>>;

struct SymEigen {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // vectors[i] pairs with values[i]
};

// Cyclic Jacobi rotations; a is symmetrized first.
SymEigen jacobi_eigen(const Matrix& a, double tol = 1e-15, int max_sweeps = 100);

// Explicit formulas for n <= 3: 2x2 quadratic root, 3x3 block and swap
// structure, otherwise the trigonometric cubic solution. Ascending.
std::vector<double> closed_form_eigenvalues(const Matrix& a);

}  // namespace chlat
