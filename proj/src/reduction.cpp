#include "chlat/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace chlat {

const char* case_name(ReductionCase c) {
  switch (c) {
    case ReductionCase::Mult2: return "Mult2";
    case ReductionCase::Mult4: return "Mult4";
    case ReductionCase::Mult6NonResonant: return "Mult6NonResonant";
    case ReductionCase::Mult6ResonantEven: return "Mult6ResonantEven";
    case ReductionCase::LongRangeMult2: return "LongRangeMult2";
    case ReductionCase::Mult6ResonantGeneral: return "Mult6ResonantGeneral";
  }
  return "Unknown";
}

namespace {

WaveIndex canonical(const WaveIndex& n) {
  return (n.n1 > 0 || (n.n1 == 0 && n.n2 > 0)) ? n : -n;
}

// The third representative must be an integer combination a k1 + b k2 with
// (|a|,|b|) != (1,1); otherwise the slaved denominators can vanish.
void check_nonresonant_geometry(const CriticalSet& cs) {
  const auto& r = cs.representatives;
  // Some labeling must write one vector as an integer combination of the others.
  for (int c = 0; c < 3; ++c) {
    const WaveIndex& u = r[(c + 1) % 3];
    const WaveIndex& v = r[(c + 2) % 3];
    const WaveIndex& w = r[c];
    long det = static_cast<long>(u.n1) * v.n2 - static_cast<long>(u.n2) * v.n1;
    long an = static_cast<long>(w.n1) * v.n2 - static_cast<long>(w.n2) * v.n1;
    long bn = static_cast<long>(u.n1) * w.n2 - static_cast<long>(u.n2) * w.n1;
    if (det == 0 || an % det != 0 || bn % det != 0) continue;
    long a = an / det, b = bn / det;
    if (std::labs(a) == 1 && std::labs(b) == 1) {
      throw Error(ErrorCode::UnsupportedCase, "geometry is resonant");
    }
    return;
  }
  throw Error(ErrorCode::UnsupportedCase,
              "no critical vector is an integer combination of the other two");
}

// Shared routing for both the manifold list and the reduced system.
void check_reducible(const CriticalSet& cs, const ModelParams& params) {
  require_in_model(cs);
  if (params.sigma > 0.0 && cs.multiplicity != 2) {
    throw Error(ErrorCode::UnsupportedCase,
                "long-range reduction is derived only for a shell of two members");
  }
  if (cs.resonance == Resonance::Mult6NonResonant) check_nonresonant_geometry(cs);
}

struct Slaving {
  const CriticalSet& cs;
  const DualLattice& dual;
  double lambda;
  double sigma;
  double gamma2;

  // gamma2 |t|^2 / beta_t: amplitude of the slaved mode per unit source.
  double gain(const WaveIndex& t) const {
    double q = norm2(t, dual);
    double b = eigenvalue_at(q, lambda, sigma);
    if (std::abs(b) / q < 1e-9 * cs.norm2) {
      std::ostringstream os;
      os << "slaved mode " << t.str() << " is critical at lambda=" << lambda;
      throw Error(ErrorCode::ResonantDenominator, os.str());
    }
    return gamma2 * q / b;
  }

  bool slaved(const WaveIndex& t) const { return !t.is_zero() && !cs.contains(t); }
};

}  // namespace

ReductionCase reduction_case(const CriticalSet& cs, const ModelParams& params) {
  check_reducible(cs, params);
  switch (cs.resonance) {
    case Resonance::Mult2:
      return params.sigma > 0.0 ? ReductionCase::LongRangeMult2 : ReductionCase::Mult2;
    case Resonance::Mult4: return ReductionCase::Mult4;
    case Resonance::Mult6NonResonant: return ReductionCase::Mult6NonResonant;
    case Resonance::Mult6Resonant:
      if (!params.even_symmetry) {
        throw Error(ErrorCode::UnsupportedCase,
                    "resonant shell without evenness is supported for integration only");
      }
      return ReductionCase::Mult6ResonantEven;
    case Resonance::OutOfModel: break;
  }
  throw Error(ErrorCode::CardinalityOutOfModel, "shell outside the reduction model");
}

ManifoldExpansion manifold_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                        const ModelParams& params, LambdaMode mode) {
  check_reducible(cs, params);
  Slaving s{cs, dual, mode == LambdaMode::Critical ? cs.lambda0 : params.lambda, params.sigma,
            params.gamma2};
  ManifoldExpansion m;
  const auto& reps = cs.representatives;
  bool cosine = cs.resonance == Resonance::Mult6Resonant && params.even_symmetry;
  if (cosine) {
    m.basis = Basis::Cosine;
    m.unstable = reps;
    for (int p = 0; p < static_cast<int>(reps.size()); ++p) {
      for (int q = p; q < static_cast<int>(reps.size()); ++q) {
        // cos a cos b = (cos(a+b) + cos(a-b))/2
        std::vector<std::pair<WaveIndex, double>> parts;
        if (p == q) {
          parts.push_back({reps[p] * 2, 0.5});
        } else {
          parts.push_back({reps[p] + reps[q], 1.0});
          parts.push_back({reps[p] - reps[q], 1.0});
        }
        for (const auto& [t, w] : parts) {
          if (!s.slaved(t)) continue;
          m.terms.push_back({canonical(t), {p, q}, w * s.gain(t)});
        }
      }
    }
    return m;
  }
  m.basis = Basis::Exponential;
  for (const auto& r : reps) {
    m.unstable.push_back(r);
    m.unstable.push_back(-r);
  }
  const int n = static_cast<int>(m.unstable.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      WaveIndex t = m.unstable[i] + m.unstable[j];
      if (!s.slaved(t)) continue;
      m.terms.push_back({t, {i, j}, (i == j ? 1.0 : 2.0) * s.gain(t)});
    }
  }
  return m;
}

std::complex<double> evaluate_manifold(const ManifoldExpansion& m, const WaveIndex& target,
                                       const std::vector<std::complex<double>>& y) {
  WaveIndex t = m.basis == Basis::Cosine ? canonical(target) : target;
  std::complex<double> v = 0.0;
  for (const auto& term : m.terms) {
    if (term.target == t) v += term.value * y.at(term.monomial.i) * y.at(term.monomial.j);
  }
  return v;
}

namespace {

std::complex<double> project_slaved(const std::vector<WaveIndex>& modes, const DualLattice& dual,
                                    const ModelParams& params, bool cosine,
                                    const WaveIndex& target,
                                    const std::vector<std::complex<double>>& y, int M) {
  using cd = std::complex<double>;
  const std::size_t P = modes.size();
  std::vector<Vec2> kv(P);
  for (std::size_t p = 0; p < P; ++p) kv[p] = cartesian(modes[p], dual);
  cd acc = 0.0;
  for (int a = 0; a < M; ++a) {
    for (int b = 0; b < M; ++b) {
      double s1 = static_cast<double>(a) / M, s2 = static_cast<double>(b) / M;
      cd u = 0.0, lap = 0.0, gx = 0.0, gy = 0.0;
      for (std::size_t p = 0; p < P; ++p) {
        double th = 2.0 * kPi * (modes[p].n1 * s1 + modes[p].n2 * s2);
        double q = kv[p].norm2();
        if (cosine) {
          u += y[p] * std::cos(th);
          lap += -q * y[p] * std::cos(th);
          gx += -kv[p].x * y[p] * std::sin(th);
          gy += -kv[p].y * y[p] * std::sin(th);
        } else {
          cd e = std::polar(1.0, th);
          u += y[p] * e;
          lap += -q * y[p] * e;
          gx += cd(0.0, kv[p].x) * y[p] * e;
          gy += cd(0.0, kv[p].y) * y[p] * e;
        }
      }
      // Laplacian of u^2 by the product rule; no use of the target multiplier.
      cd g = params.gamma2 * (2.0 * u * lap + 2.0 * (gx * gx + gy * gy));
      double th = 2.0 * kPi * (target.n1 * s1 + target.n2 * s2);
      acc += cosine ? g * std::cos(th) : g * std::polar(1.0, -th);
    }
  }
  cd mean = acc / static_cast<double>(M) / static_cast<double>(M);
  double weight = cosine ? 0.5 : 1.0;
  double bt = eigenvalue(target, dual, params);
  return -mean / (bt * weight);
}

}  // namespace

std::complex<double> manifold_quadrature_oracle(const CriticalSet& cs, const DualLattice& dual,
                                                const ModelParams& params,
                                                const WaveIndex& target,
                                                const std::vector<std::complex<double>>& y,
                                                int grid) {
  check_reducible(cs, params);
  if (target.is_zero() || cs.contains(target)) {
    throw Error(ErrorCode::InvalidParameter, "target must be a stable mode");
  }
  bool cosine = cs.resonance == Resonance::Mult6Resonant && params.even_symmetry;
  std::vector<WaveIndex> modes;
  for (const auto& r : cs.representatives) {
    modes.push_back(r);
    if (!cosine) modes.push_back(-r);
  }
  if (y.size() != modes.size()) throw Error(ErrorCode::InvalidParameter, "amplitude size mismatch");
  int top = target.max_abs();
  for (const auto& n : modes) top = std::max(top, n.max_abs());
  int M = std::max({grid, 8, 4 * top});
  auto v1 = project_slaved(modes, dual, params, cosine, target, y, M);
  auto v2 = project_slaved(modes, dual, params, cosine, target, y, 2 * M);
  double ysum = 0.0;
  for (const auto& v : y) ysum += std::abs(v);
  double q = norm2(target, dual);
  double floor = 1e-13 * std::abs(params.gamma2) * ysum * ysum * q /
                 std::abs(eigenvalue(target, dual, params));
  if (std::abs(v1 - v2) > std::max(1e-8 * std::abs(v2), floor)) {
    throw Error(ErrorCode::QuadratureUnderResolved, "quadrature changed under grid doubling");
  }
  return v2;
}

namespace {

struct Interactions {
  double self;
  double cross[3];  // pairs (0,1), (0,2), (1,2)
};

// Cubic coefficients of the complex amplitude equations. The self term comes
// from the slaved 2k mode, the cross terms from k_i +/- k_j when slaved.
Interactions interactions(const CriticalSet& cs, const DualLattice& dual, const ModelParams& params,
                          double lam_manifold) {
  Slaving s{cs, dual, lam_manifold, params.sigma, params.gamma2};
  const double q = cs.norm2;
  const double g2 = params.gamma2, g3 = params.gamma3;
  const auto& r = cs.representatives;
  Interactions in{};
  in.self = -2.0 * q * g2 * s.gain(r[0] * 2) - 3.0 * q * g3;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int c = 0; c < 3; ++c) {
    int i = pairs[c][0], j = pairs[c][1];
    if (j >= static_cast<int>(r.size())) continue;
    double sum = 0.0;
    for (const WaveIndex& t : {r[i] + r[j], r[i] - r[j]}) {
      if (s.slaved(t)) sum += s.gain(t);
    }
    in.cross[c] = -4.0 * q * g2 * sum - 6.0 * q * g3;
  }
  return in;
}

double recip(const DualLattice& dual, const WaveIndex& t, double q) {
  return 1.0 / (norm2(t, dual) - q);
}

}  // namespace

ReducedCoefficients reduced_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                         const ModelParams& params, LambdaMode mode) {
  ReducedCoefficients rc;
  rc.reduction_case = reduction_case(cs, params);
  const double q = cs.norm2;
  rc.norm2 = q;
  rc.lambda = params.lambda;
  rc.lambda_manifold = mode == LambdaMode::Critical ? cs.lambda0 : params.lambda;
  rc.beta = eigenvalue_at(q, params.lambda, params.sigma);
  rc.pairs = static_cast<int>(cs.representatives.size());
  Interactions in = interactions(cs, dual, params, rc.lambda_manifold);
  const auto& r = cs.representatives;

  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
      rc.xi = rc.eta = in.self;
      rc.a_constant = 2.0 / (9.0 * q);
      break;
    case ReductionCase::LongRangeMult2:
      rc.xi = rc.eta = in.self;
      rc.a_constant = 8.0 * q / (9.0 * (4.0 * q * q - params.sigma));
      break;
    case ReductionCase::Mult4: {
      rc.xi = in.self;
      rc.eta = in.cross[0];
      double dm = norm2(r[0] - r[1], dual) - q;
      double dp = norm2(r[0] + r[1], dual) - q;
      rc.a_constant = 2.0 / 9.0 * std::max(1.0 / (3.0 * q) + 2.0 / dm + 2.0 / dp, 1.0 / q);
      break;
    }
    case ReductionCase::Mult6NonResonant: {
      rc.xi = in.self;
      rc.eta = in.cross[0];
      rc.chi = in.cross[1];
      rc.omega = in.cross[2];
      double d12 = recip(dual, r[0] - r[1], q) + recip(dual, r[0] + r[1], q);
      double d13 = recip(dual, r[0] - r[2], q) + recip(dual, r[0] + r[2], q);
      double d23 = recip(dual, r[1] - r[2], q) + recip(dual, r[1] + r[2], q);
      rc.a_constant = std::max({2.0 / (9.0 * q),
                                2.0 / (27.0 * q) + 4.0 / 9.0 * d12,
                                2.0 / (27.0 * q) + 4.0 / 9.0 * d13,
                                2.0 / (27.0 * q) + 4.0 / 9.0 * d23,
                                2.0 / (45.0 * q) + 4.0 / 15.0 * (d12 + d13),
                                2.0 / (45.0 * q) + 4.0 / 15.0 * (d12 + d23),
                                2.0 / (45.0 * q) + 4.0 / 15.0 * (d13 + d23)});
      break;
    }
    case ReductionCase::Mult6ResonantEven: {
      // Real cosine amplitudes are twice the complex ones.
      rc.xi = in.self / 4.0;
      rc.eta = in.cross[0] / 4.0;
      rc.chi = in.cross[1] / 4.0;
      rc.omega = in.cross[2] / 4.0;
      rc.tau = -q * params.gamma2;
      double scale = std::max({std::abs(rc.eta), std::abs(rc.chi), std::abs(rc.omega), 1e-300});
      if (std::abs(rc.eta - rc.chi) > 1e-9 * scale || std::abs(rc.eta - rc.omega) > 1e-9 * scale) {
        throw Error(ErrorCode::UnsupportedCase, "resonant cross interactions are not equal");
      }
      rc.a_constant = 2.0 / (9.0 * q);
      break;
    }
    case ReductionCase::Mult6ResonantGeneral:
      break;
  }
  return rc;
}

ReducedCoefficients general_resonant_coefficients(const CriticalSet& cs, const DualLattice& dual,
                                                  const ModelParams& params, LambdaMode mode) {
  check_reducible(cs, params);
  if (cs.resonance != Resonance::Mult6Resonant) {
    throw Error(ErrorCode::UnsupportedCase, "shell is not resonant");
  }
  ReducedCoefficients rc;
  rc.reduction_case = ReductionCase::Mult6ResonantGeneral;
  const double q = cs.norm2;
  rc.norm2 = q;
  rc.lambda = params.lambda;
  rc.lambda_manifold = mode == LambdaMode::Critical ? cs.lambda0 : params.lambda;
  rc.beta = eigenvalue_at(q, params.lambda, params.sigma);
  rc.pairs = 3;
  Interactions in = interactions(cs, dual, params, rc.lambda_manifold);
  rc.xi = in.self;
  rc.eta = in.cross[0];
  rc.chi = in.cross[1];
  rc.omega = in.cross[2];
  rc.tau = 2.0 * q * params.gamma2;
  rc.a_constant = 2.0 / (9.0 * q);
  return rc;
}

}  // namespace chlat
