#include "chlat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chlat {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateLattice: return "DegenerateLattice";
    case ErrorCode::CardinalityOutOfModel: return "CardinalityOutOfModel";
    case ErrorCode::WrongMultiplicity: return "WrongMultiplicity";
    case ErrorCode::InvalidConcentration: return "InvalidConcentration";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NonpositiveGamma3: return "NonpositiveGamma3";
    case ErrorCode::ZeroMode: return "ZeroMode";
    case ErrorCode::PesViolation: return "PesViolation";
    case ErrorCode::ResonantDenominator: return "ResonantDenominator";
    case ErrorCode::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorCode::UnsupportedCase: return "UnsupportedCase";
    case ErrorCode::DegenerateCoefficients: return "DegenerateCoefficients";
    case ErrorCode::PreTransition: return "PreTransition";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::UnderResolved: return "UnderResolved";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string WaveIndex::str() const {
  std::ostringstream os;
  os << "(" << n1 << "," << n2 << ")";
  return os.str();
}

const char* resonance_name(Resonance r) {
  switch (r) {
    case Resonance::Mult2: return "Mult2";
    case Resonance::Mult4: return "Mult4";
    case Resonance::Mult6NonResonant: return "Mult6NonResonant";
    case Resonance::Mult6Resonant: return "Mult6Resonant";
    case Resonance::OutOfModel: return "OutOfModel";
  }
  return "Unknown";
}

bool CriticalSet::contains(const WaveIndex& n) const {
  return std::binary_search(members.begin(), members.end(), n);
}

int CriticalSet::max_index() const {
  int m = 0;
  for (const auto& n : members) m = std::max(m, n.max_abs());
  return m;
}

Vec2 cartesian(const WaveIndex& n, const DualLattice& dual) {
  return dual.k1 * static_cast<double>(n.n1) + dual.k2 * static_cast<double>(n.n2);
}

double norm2(const WaveIndex& n, const DualLattice& dual) {
  return cartesian(n, dual).norm2();
}

namespace {

// Inverse-transpose of [a b] scaled by 2*pi; maps either basis to its dual.
std::pair<Vec2, Vec2> biorthogonal(const Vec2& a, const Vec2& b) {
  double det = a.cross(b);
  double s = 2.0 * kPi / det;
  return {Vec2{b.y, -b.x} * s, Vec2{-a.y, a.x} * s};
}

bool positive_half(const WaveIndex& n) {
  return n.n1 > 0 || (n.n1 == 0 && n.n2 > 0);
}

constexpr double kTieTol = 1e-9;

}  // namespace

DualLattice dual_lattice(const LatticeSpec& spec) {
  double scale = spec.l1.norm() * spec.l2.norm();
  if (!(std::abs(spec.l1.cross(spec.l2)) > 1e-12 * scale)) {
    throw Error(ErrorCode::DegenerateLattice, "spanning vectors are linearly dependent");
  }
  auto [k1, k2] = biorthogonal(spec.l1, spec.l2);
  return {k1, k2};
}

LatticeSpec physical_lattice(const DualLattice& dual) {
  double scale = dual.k1.norm() * dual.k2.norm();
  if (!(std::abs(dual.k1.cross(dual.k2)) > 1e-12 * scale)) {
    throw Error(ErrorCode::DegenerateLattice, "dual vectors are linearly dependent");
  }
  auto [l1, l2] = biorthogonal(dual.k1, dual.k2);
  return {l1, l2};
}

double shell_objective(double q, double sigma) {
  return sigma > 0.0 ? q + sigma / q : q;
}

namespace {

void finish_shell(CriticalSet& cs, const DualLattice& dual) {
  std::sort(cs.members.begin(), cs.members.end());
  cs.multiplicity = static_cast<int>(cs.members.size());
  cs.representatives.clear();
  for (const auto& n : cs.members) {
    if (positive_half(n)) cs.representatives.push_back(n);
  }
  double qmin = 1e300, qmax = 0.0;
  for (const auto& n : cs.members) {
    double q = norm2(n, dual);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  bool equal_norms = qmax - qmin <= kTieTol * qmax;
  cs.norm2 = norm2(cs.representatives.front(), dual);
  cs.lambda0 = shell_objective(cs.norm2, cs.sigma);

  if (!equal_norms) {
    cs.resonance = Resonance::OutOfModel;
  } else if (cs.multiplicity == 2) {
    cs.resonance = Resonance::Mult2;
  } else if (cs.multiplicity == 4) {
    cs.resonance = Resonance::Mult4;
  } else if (cs.multiplicity == 6) {
    cs.resonance = detect_resonance(cs);
    if (cs.resonance == Resonance::Mult6Resonant) {
      // Flip signs so that the third vector is the sum of the first two.
      auto& r = cs.representatives;
      [&r] {
        for (int s2 : {1, -1}) {
          for (int s3 : {1, -1}) {
            if (r[2] * s3 == r[0] + r[1] * s2) {
              r[1] = r[1] * s2;
              r[2] = r[2] * s3;
              return;
            }
          }
        }
      }();
    }
  } else {
    cs.resonance = Resonance::OutOfModel;
  }
  cs.critical_vectors.clear();
  for (const auto& n : cs.representatives) cs.critical_vectors.push_back(cartesian(n, dual));
}

}  // namespace

CriticalSet minimal_shell(const DualLattice& dual, double sigma, int search_radius) {
  if (sigma < 0.0) throw Error(ErrorCode::InvalidParameter, "sigma must be nonnegative");
  double area = std::abs(dual.k1.cross(dual.k2));
  if (!(area > 1e-12 * dual.k1.norm() * dual.k2.norm())) {
    throw Error(ErrorCode::DegenerateLattice, "dual vectors are linearly dependent");
  }
  // Any index with |n_1| > R or |n_2| > R has |k| >= (R+1) * h.
  double h = area / std::max(dual.k1.norm(), dual.k2.norm());
  int R = std::max(1, search_radius);
  for (;;) {
    double fmin = 1e300;
    for (int n1 = -R; n1 <= R; ++n1) {
      for (int n2 = -R; n2 <= R; ++n2) {
        if (n1 == 0 && n2 == 0) continue;
        fmin = std::min(fmin, shell_objective(norm2({n1, n2}, dual), sigma));
      }
    }
    double band = fmin * (1.0 + kTieTol);
    double qlb = (R + 1.0) * (R + 1.0) * h * h;
    bool certified = sigma > 0.0 ? (qlb >= std::sqrt(sigma) && shell_objective(qlb, sigma) > band)
                                 : qlb > band;
    if (certified) {
      CriticalSet cs;
      cs.sigma = sigma;
      cs.certified_minimal = true;
      for (int n1 = -R; n1 <= R; ++n1) {
        for (int n2 = -R; n2 <= R; ++n2) {
          if (n1 == 0 && n2 == 0) continue;
          if (shell_objective(norm2({n1, n2}, dual), sigma) <= band) cs.members.push_back({n1, n2});
        }
      }
      finish_shell(cs, dual);
      return cs;
    }
    if (R > (1 << 13)) {
      throw Error(ErrorCode::DegenerateLattice, "shell search did not certify; lattice too skew");
    }
    R *= 2;
  }
}

CriticalSet prescribed_shell(const DualLattice& dual, const std::vector<WaveIndex>& representatives,
                             double sigma) {
  if (representatives.empty()) throw Error(ErrorCode::InvalidParameter, "empty shell");
  CriticalSet cs;
  cs.sigma = sigma;
  cs.certified_minimal = false;
  for (const auto& n : representatives) {
    if (n.is_zero()) throw Error(ErrorCode::ZeroMode, "zero index in shell");
    cs.members.push_back(n);
    cs.members.push_back(-n);
  }
  std::sort(cs.members.begin(), cs.members.end());
  if (std::adjacent_find(cs.members.begin(), cs.members.end()) != cs.members.end()) {
    throw Error(ErrorCode::InvalidParameter, "duplicate pair in shell");
  }
  finish_shell(cs, dual);
  if (cs.resonance == Resonance::OutOfModel && cs.multiplicity <= 6) {
    throw Error(ErrorCode::InvalidParameter, "prescribed shell members have unequal norms");
  }
  return cs;
}

Resonance detect_resonance(const CriticalSet& cs) {
  if (cs.multiplicity != 6 || cs.representatives.size() != 3) {
    throw Error(ErrorCode::WrongMultiplicity, "resonance detection needs multiplicity 6");
  }
  const auto& r = cs.representatives;
  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      if ((r[0] * s1 + r[1] * s2 + r[2]).is_zero()) return Resonance::Mult6Resonant;
    }
  }
  return Resonance::Mult6NonResonant;
}

void require_in_model(const CriticalSet& cs) {
  if (cs.resonance == Resonance::OutOfModel) {
    std::ostringstream os;
    os << "critical shell has " << cs.multiplicity << " members; reduction supports 2, 4 or 6";
    throw Error(ErrorCode::CardinalityOutOfModel, os.str());
  }
}

ScaledParams nondimensionalize(double mu, double D, double RT, double a, double u0, double l) {
  if (!(u0 > 0.0 && u0 < 1.0)) {
    throw Error(ErrorCode::InvalidConcentration, "u0 must lie in (0,1)");
  }
  if (!(mu > 0.0 && D > 0.0 && l > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "mu, D and l must be positive");
  }
  double v = 1.0 - u0;
  ScaledParams p;
  p.b1 = (RT / (u0 * v) - 2.0 * a) * D / 2.0;
  p.b2 = (2.0 * u0 - 1.0) * D * RT / (6.0 * u0 * u0 * v * v);
  p.b3 = (1.0 - 3.0 * u0 + 3.0 * u0 * u0) * D * RT / (12.0 * u0 * u0 * u0 * v * v * v);
  double s = l * l / (mu * D);
  p.lambda = -s * p.b1;
  p.gamma2 = s * p.b2 * u0;
  p.gamma3 = s * p.b3 * u0 * u0;
  if (!(p.gamma3 > 0.0)) {
    throw Error(ErrorCode::NonpositiveGamma3, "resulting gamma3 is not positive");
  }
  return p;
}

}  // namespace chlat
