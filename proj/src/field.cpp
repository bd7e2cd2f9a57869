#include "chlat/field.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace chlat {

double SpectralField::hermitian_violation() const {
  double v = 0.0;
  for (int n1 = -N_; n1 <= N_; ++n1)
    for (int n2 = -N_; n2 <= N_; ++n2) v = std::max(v, std::abs(at(n1, n2) - std::conj(at(-n1, -n2))));
  return v;
}

void SpectralField::enforce_hermitian() {
  for (int n1 = 0; n1 <= N_; ++n1) {
    for (int n2 = -N_; n2 <= N_; ++n2) {
      if (n1 == 0 && n2 < 0) continue;
      auto& a = at(n1, n2);
      auto& b = at(-n1, -n2);
      std::complex<double> m = 0.5 * (a + std::conj(b));
      a = m;
      b = std::conj(m);
    }
  }
  at(0, 0) = 0.0;
}

void SpectralField::project_even() {
  for (auto& v : z_) v = v.real();
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& v : z_) m = std::max(m, std::abs(v));
  return m;
}

SpectralField SpectralField::resized(int N) const {
  SpectralField out(N);
  int m = std::min(N, N_);
  for (int n1 = -m; n1 <= m; ++n1)
    for (int n2 = -m; n2 <= m; ++n2) out.at(n1, n2) = at(n1, n2);
  return out;
}

void write_field_file(const std::string& path, const SpectralField& f, const DualLattice& dual) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  char buf[256];
  std::snprintf(buf, sizeof buf, "# k1=%.17g,%.17g k2=%.17g,%.17g N=%d\n", dual.k1.x, dual.k1.y,
                dual.k2.x, dual.k2.y, f.truncation());
  os << buf << "n1,n2,re,im\n";
  const int N = f.truncation();
  for (int n1 = -N; n1 <= N; ++n1) {
    for (int n2 = -N; n2 <= N; ++n2) {
      const auto& z = f.at(n1, n2);
      if (z == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", n1, n2, z.real(), z.imag());
      os << buf;
    }
  }
  if (!os) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

SpectralField read_field_file(const std::string& path, DualLattice* dual) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot read " + path);
  std::string header;
  std::getline(is, header);
  DualLattice d;
  int N = -1;
  if (std::sscanf(header.c_str(), "# k1=%lf,%lf k2=%lf,%lf N=%d", &d.k1.x, &d.k1.y, &d.k2.x,
                  &d.k2.y, &N) != 5 || N < 0) {
    throw Error(ErrorCode::ConfigError, "malformed field file header in " + path);
  }
  if (dual) *dual = d;
  std::string line;
  std::getline(is, line);  // column names
  SpectralField f(N);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int n1, n2;
    double re, im;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &n1, &n2, &re, &im) != 4 ||
        std::max(std::abs(n1), std::abs(n2)) > N) {
      throw Error(ErrorCode::ConfigError, "malformed field row in " + path);
    }
    f.at(n1, n2) = {re, im};
  }
  return f;
}

}  // namespace chlat
