#pragma once

#include <complex>
#include <string>
#include <vector>

#include "chlat/lattice.hpp"

namespace chlat {

// Truncated Fourier amplitudes z_n for |n1|, |n2| <= N; u(x) = sum z_n e^{i k_n x}.
class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int N) : N_(N), z_((2 * N + 1) * (2 * N + 1)) {}

  int truncation() const { return N_; }
  int width() const { return 2 * N_ + 1; }
  std::complex<double>& at(int n1, int n2) { return z_[slot(n1, n2)]; }
  const std::complex<double>& at(int n1, int n2) const { return z_[slot(n1, n2)]; }
  std::complex<double>& at(const WaveIndex& n) { return at(n.n1, n.n2); }
  const std::complex<double>& at(const WaveIndex& n) const { return at(n.n1, n.n2); }
  bool in_range(const WaveIndex& n) const { return n.max_abs() <= N_; }
  std::vector<std::complex<double>>& data() { return z_; }
  const std::vector<std::complex<double>>& data() const { return z_; }

  // max |z_n - conj(z_{-n})|
  double hermitian_violation() const;
  // Averages each pair onto a Hermitian one and pins the mean to zero.
  void enforce_hermitian();
  // Zeroes imaginary parts, which makes the field even in x.
  void project_even();
  double max_abs() const;
  // Copy into a field with a different truncation (zero padded or cut).
  SpectralField resized(int N) const;

 private:
  std::size_t slot(int n1, int n2) const {
    return static_cast<std::size_t>(n1 + N_) * width() + static_cast<std::size_t>(n2 + N_);
  }
  int N_ = 0;
  std::vector<std::complex<double>> z_;
};

// Field file: header "# k1=x,y k2=x,y N=n" then rows n1,n2,re,im.
void write_field_file(const std::string& path, const SpectralField& f, const DualLattice& dual);
SpectralField read_field_file(const std::string& path, DualLattice* dual = nullptr);

}  // namespace chlat
