#include "chlat/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chlat {

double eigenvalue(const WaveIndex& n, const DualLattice& dual, const ModelParams& params) {
  if (n.is_zero()) throw Error(ErrorCode::ZeroMode, "the zero mode is excluded by the mass constraint");
  return eigenvalue_at(norm2(n, dual), params.lambda, params.sigma);
}

PesReport verify_pes(const CriticalSet& cs, const DualLattice& dual,
                     const std::function<ModelParams(double)>& params_at, int probe_radius) {
  PesReport rep;
  rep.probe_radius = probe_radius > 0 ? probe_radius : 3 * std::max(1, cs.max_index());
  const double lam0 = cs.lambda0;
  const double delta = 1e-3 * lam0;
  ModelParams at0 = params_at(lam0);
  ModelParams above = params_at(lam0 + delta);
  ModelParams below = params_at(lam0 - delta);

  auto fail = [](const WaveIndex& n, const std::string& why) {
    std::ostringstream os;
    os << "exchange of stabilities fails at index " << n.str() << ": " << why;
    throw Error(ErrorCode::PesViolation, os.str());
  };

  rep.min_flip = 1e300;
  for (const auto& n : cs.members) {
    double q = norm2(n, dual);
    double b = eigenvalue(n, dual, at0);
    double scale = q * q + std::abs(lam0) * q + at0.sigma;
    rep.worst_on_shell = std::max(rep.worst_on_shell, std::abs(b));
    if (std::abs(b) > 1e-9 * scale) fail(n, "critical eigenvalue is nonzero at lambda0");
    double up = eigenvalue(n, dual, above);
    double down = eigenvalue(n, dual, below);
    rep.min_flip = std::min({rep.min_flip, up, -down});
    if (!(up > 0.0 && down < 0.0)) fail(n, "critical eigenvalue does not change sign across lambda0");
  }

  rep.max_off_shell = -1e300;
  const int R = rep.probe_radius;
  for (int n1 = -R; n1 <= R; ++n1) {
    for (int n2 = -R; n2 <= R; ++n2) {
      WaveIndex n{n1, n2};
      if (n.is_zero() || cs.contains(n)) continue;
      double b = eigenvalue(n, dual, at0);
      if (b > rep.max_off_shell) {
        rep.max_off_shell = b;
        rep.max_off_index = n;
      }
    }
  }
  if (!(rep.max_off_shell < 0.0)) fail(rep.max_off_index, "noncritical eigenvalue is not negative at lambda0");
  rep.passed = true;
  return rep;
}

std::vector<std::pair<WaveIndex, double>> growth_ordering(const DualLattice& dual,
                                                          const ModelParams& params, int count) {
  count = std::max(1, count);
  double area = std::abs(dual.k1.cross(dual.k2));
  double h = area / std::max(dual.k1.norm(), dual.k2.norm());
  std::vector<std::pair<WaveIndex, double>> all;
  for (int R = 4;; R *= 2) {
    all.clear();
    for (int n1 = -R; n1 <= R; ++n1) {
      for (int n2 = -R; n2 <= R; ++n2) {
        if (n1 == 0 && n2 == 0) continue;
        all.push_back({{n1, n2}, eigenvalue({n1, n2}, dual, params)});
      }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    // beta is concave in q = |k|^2 and peaks at q = lambda/2, so beyond the box
    // it is bounded by its value at the box-boundary lower bound on q.
    double qlb = (R + 1.0) * (R + 1.0) * h * h;
    if (static_cast<int>(all.size()) > count && qlb >= params.lambda / 2.0 &&
        all[count - 1].second > eigenvalue_at(qlb, params.lambda, params.sigma)) {
      break;
    }
  }
  // Equal-norm modes differ only by rounding; order them by index.
  double scale = std::max(1.0, std::abs(all.front().second));
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i + 1;
    while (j < all.size() && all[i].second - all[j].second <= 1e-12 * scale) ++j;
    std::sort(all.begin() + i, all.begin() + j,
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<int>(j) >= count) break;
    i = j;
  }
  all.resize(count);
  return all;
}

}  // namespace chlat
