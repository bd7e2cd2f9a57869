#include "chlat/symeig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chlat {

SymEigen jacobi_eigen(const Matrix& a_in, double tol, int max_sweeps) {
  const std::size_t n = a_in.size();
  Matrix a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = 0.5 * (a_in[i][j] + a_in[j][i]);
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double scale = 0.0;
  for (const auto& row : a)
    for (double x : row) scale = std::max(scale, std::abs(x));

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (std::sqrt(off) <= tol * scale || scale == 0.0) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a[x][x] < a[y][y]; });
  SymEigen out;
  for (auto i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

namespace {

std::vector<double> eig2(double a, double b, double d) {
  double m = 0.5 * (a + d);
  double r = std::hypot(0.5 * (a - d), b);
  return {m - r, m + r};
}

std::vector<double> eig3_trig(const Matrix& a) {
  double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
  double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
  double p2 = (a[0][0] - q) * (a[0][0] - q) + (a[1][1] - q) * (a[1][1] - q) +
              (a[2][2] - q) * (a[2][2] - q) + 2.0 * p1;
  double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  double b[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
  double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
               b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
               b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  double r = std::clamp(det / 2.0, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  const double pi = 3.14159265358979323846;
  double e1 = q + 2.0 * p * std::cos(phi);
  double e3 = q + 2.0 * p * std::cos(phi + 2.0 * pi / 3.0);
  double e2 = 3.0 * q - e1 - e3;
  std::vector<double> out{e1, e2, e3};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<double> closed_form_eigenvalues(const Matrix& a) {
  const std::size_t n = a.size();
  std::vector<double> out;
  if (n == 1) {
    out = {a[0][0]};
  } else if (n == 2) {
    out = eig2(a[0][0], 0.5 * (a[0][1] + a[1][0]), a[1][1]);
  } else if (n == 3) {
    double norm = 0.0;
    for (const auto& row : a)
      for (double x : row) norm = std::max(norm, std::abs(x));
    const double eps = 1e-14 * norm;
    for (int k = 0; k < 3 && out.empty(); ++k) {
      int i = (k + 1) % 3, j = (k + 2) % 3;
      if (std::abs(a[k][i]) <= eps && std::abs(a[k][j]) <= eps) {
        out = eig2(a[i][i], a[i][j], a[j][j]);
        out.push_back(a[k][k]);
      }
    }
    // Swap symmetry i<->j (up to sign) leaves (e_i - s e_j) as an eigenvector.
    for (int k = 0; k < 3 && out.empty(); ++k) {
      int i = (k + 1) % 3, j = (k + 2) % 3;
      if (std::abs(a[i][i] - a[j][j]) <= eps &&
          std::abs(std::abs(a[k][i]) - std::abs(a[k][j])) <= eps) {
        double s = a[k][i] * a[k][j] >= 0.0 ? 1.0 : -1.0;
        out = eig2(a[k][k], std::sqrt(2.0) * a[k][i], a[i][i] + s * a[i][j]);
        out.push_back(a[i][i] - s * a[i][j]);
      }
    }
    if (out.empty()) out = eig3_trig(a);
  } else {
    throw std::invalid_argument("closed-form eigenvalues only for n <= 3");
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace chlat
