#include "chlat/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace chlat {

const char* pattern_name(Pattern p) {
  switch (p) {
    case Pattern::Trivial: return "Trivial";
    case Pattern::Roll: return "Roll";
    case Pattern::SquareTorus: return "SquareTorus";
    case Pattern::MixedTorus: return "MixedTorus";
    case Pattern::TripleTorus: return "TripleTorus";
    case Pattern::Hexagon: return "Hexagon";
    case Pattern::Rectangle: return "Rectangle";
  }
  return "Unknown";
}

const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "Stable";
    case Stability::Saddle: return "Saddle";
    case Stability::Unstable: return "Unstable";
    case Stability::Marginal: return "Marginal";
    case Stability::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

int dimension(const ReducedCoefficients& rc) {
  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
    case ReductionCase::LongRangeMult2: return 1;
    case ReductionCase::Mult4: return 2;
    case ReductionCase::Mult6NonResonant:
    case ReductionCase::Mult6ResonantEven: return 3;
    case ReductionCase::Mult6ResonantGeneral: break;
  }
  throw Error(ErrorCode::UnsupportedCase,
              "the resonant system without evenness has no radial equilibrium form");
}

// Cubic amplitude systems r_i' = beta r_i + (self r_i^2 + sum_j c_ij r_j^2) r_i.
struct Cubic {
  double self;
  double c[3][3];
};

Cubic cubic_of(const ReducedCoefficients& rc) {
  Cubic k{};
  if (rc.reduction_case == ReductionCase::Mult2 || rc.reduction_case == ReductionCase::LongRangeMult2) {
    k.self = rc.eta;
    return k;
  }
  k.self = rc.xi;
  k.c[0][1] = k.c[1][0] = rc.eta;
  k.c[0][2] = k.c[2][0] = rc.chi;
  k.c[1][2] = k.c[2][1] = rc.omega;
  return k;
}

double coefficient_scale(const ReducedCoefficients& rc) {
  return std::max({std::abs(rc.xi), std::abs(rc.eta), std::abs(rc.chi), std::abs(rc.omega),
                   std::abs(rc.tau), 1e-300});
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

std::vector<double> reduced_field(const ReducedCoefficients& rc, const std::vector<double>& y) {
  const int n = dimension(rc);
  std::vector<double> f(n);
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven) {
    for (int i = 0; i < 3; ++i) {
      int j = (i + 1) % 3, k = (i + 2) % 3;
      f[i] = rc.beta * y[i] + rc.xi * y[i] * y[i] * y[i] +
             rc.eta * y[i] * (y[j] * y[j] + y[k] * y[k]) + rc.tau * y[j] * y[k];
    }
    return f;
  }
  Cubic k = cubic_of(rc);
  for (int i = 0; i < n; ++i) {
    double s = k.self * y[i] * y[i];
    for (int j = 0; j < n; ++j) {
      if (j != i) s += k.c[i][j] * y[j] * y[j];
    }
    f[i] = rc.beta * y[i] + s * y[i];
  }
  return f;
}

Matrix reduced_jacobian(const ReducedCoefficients& rc, const std::vector<double>& y) {
  const int n = dimension(rc);
  Matrix J(n, std::vector<double>(n, 0.0));
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven) {
    for (int i = 0; i < 3; ++i) {
      double others = 0.0;
      for (int j = 0; j < 3; ++j) {
        if (j != i) others += y[j] * y[j];
      }
      J[i][i] = rc.beta + 3.0 * rc.xi * y[i] * y[i] + rc.eta * others;
      for (int j = 0; j < 3; ++j) {
        if (j == i) continue;
        int k = 3 - i - j;
        J[i][j] = 2.0 * rc.eta * y[i] * y[j] + rc.tau * y[k];
      }
    }
    return J;
  }
  Cubic k = cubic_of(rc);
  for (int i = 0; i < n; ++i) {
    double d = rc.beta + 3.0 * k.self * y[i] * y[i];
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      d += k.c[i][j] * y[j] * y[j];
      J[i][j] = 2.0 * k.c[i][j] * y[i] * y[j];
    }
    J[i][i] = d;
  }
  return J;
}

double validity_radius(const ReducedCoefficients& rc) {
  std::vector<double> cubic;
  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
    case ReductionCase::LongRangeMult2: cubic = {rc.eta}; break;
    case ReductionCase::Mult4: cubic = {rc.xi, rc.eta}; break;
    case ReductionCase::Mult6NonResonant: cubic = {rc.xi, rc.eta, rc.chi, rc.omega}; break;
    case ReductionCase::Mult6ResonantEven: cubic = {rc.xi, rc.eta}; break;
    case ReductionCase::Mult6ResonantGeneral: cubic = {rc.xi, rc.eta, rc.chi, rc.omega}; break;
  }
  double m = 1e300;
  for (double c : cubic) {
    if (c != 0.0) m = std::min(m, std::abs(c));
  }
  if (m == 1e300) return 1e300;
  return 10.0 * std::sqrt(std::abs(rc.beta) / m);
}

EquilibriumSet fixed_points(const ReducedCoefficients& rc) {
  const int n = dimension(rc);
  EquilibriumSet out;
  const double beta = rc.beta;
  const double eps = 1e-12 * coefficient_scale(rc);
  const double rvalid = validity_radius(rc);

  out.states.push_back({"p0", std::vector<double>(n, 0.0), Pattern::Trivial});
  auto emit = [&](std::string label, std::vector<double> c, Pattern p) {
    Equilibrium e;
    e.label = std::move(label);
    e.coordinates = std::move(c);
    e.pattern = p;
    e.far_field = sup_norm(e.coordinates) > rvalid;
    e.near_origin = !e.far_field;
    out.states.push_back(std::move(e));
  };
  // sqrt(-beta/d) when real and positive; notes a vanishing denominator.
  auto radius = [&](double d, const char* fam, double& r) {
    if (std::abs(d) <= eps) {
      out.notes.push_back(std::string(fam) + ": denominator vanishes; family omitted");
      return false;
    }
    double rad = -beta / d;
    if (!(rad > 0.0)) return false;
    r = std::sqrt(rad);
    return true;
  };

  double r = 0.0;
  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
    case ReductionCase::LongRangeMult2:
      if (radius(rc.eta, "p1", r)) emit("p1", {r}, Pattern::Roll);
      break;
    case ReductionCase::Mult4:
      if (radius(rc.xi, "p1,p2", r)) {
        emit("p1", {0.0, r}, Pattern::Roll);
        emit("p2", {r, 0.0}, Pattern::Roll);
      }
      if (radius(rc.xi + rc.eta, "p3", r)) emit("p3", {r, r}, Pattern::SquareTorus);
      break;
    case ReductionCase::Mult6NonResonant: {
      const double x = rc.xi, e = rc.eta, c = rc.chi, w = rc.omega;
      if (radius(x, "p1-p3", r)) {
        emit("p1", {r, 0.0, 0.0}, Pattern::Roll);
        emit("p2", {0.0, r, 0.0}, Pattern::Roll);
        emit("p3", {0.0, 0.0, r}, Pattern::Roll);
      }
      if (radius(x + w, "p4", r)) emit("p4", {0.0, r, r}, Pattern::MixedTorus);
      if (radius(x + c, "p5", r)) emit("p5", {r, 0.0, r}, Pattern::MixedTorus);
      if (radius(x + e, "p6", r)) emit("p6", {r, r, 0.0}, Pattern::MixedTorus);
      double den = e * e * x - 2.0 * e * c * w + x * (-x * x + c * c + w * w);
      double sc = coefficient_scale(rc);
      if (std::abs(den) <= 1e-12 * sc * sc * sc) {
        out.notes.push_back("p7: denominator vanishes; family omitted");
        break;
      }
      double s1 = beta * (x - w) * (-e + x - c + w) / den;
      double s2 = beta * (x - c) * (-e + x + c - w) / den;
      double s3 = beta * (x - e) * (e + x - c - w) / den;
      if (s1 > 0.0 && s2 > 0.0 && s3 > 0.0) {
        emit("p7", {std::sqrt(s1), std::sqrt(s2), std::sqrt(s3)}, Pattern::TripleTorus);
      } else {
        out.notes.push_back("p7: radicands not all positive; no triple torus");
      }
      break;
    }
    case ReductionCase::Mult6ResonantEven: {
      const double x = rc.xi, e = rc.eta, t = rc.tau;
      if (radius(x, "rolls", r)) {
        for (int k = 0; k < 3; ++k) {
          for (double s : {1.0, -1.0}) {
            std::vector<double> c(3, 0.0);
            c[k] = s * r;
            emit(std::string(s > 0 ? "+" : "-") + "p" + std::to_string(k + 1), c, Pattern::Roll);
          }
        }
      }
      double disc = t * t - 4.0 * beta * x - 8.0 * beta * e;
      double den = 2.0 * x + 4.0 * e;
      if (std::abs(den) <= eps) {
        out.notes.push_back("hexagons: denominator 2xi+4eta vanishes; family omitted");
      } else if (disc >= 0.0) {
        double yp = (-t + std::sqrt(disc)) / den;
        double ym = (-t - std::sqrt(disc)) / den;
        emit("p4+", {yp, yp, yp}, Pattern::Hexagon);
        emit("p4-", {ym, ym, ym}, Pattern::Hexagon);
      }
      if (std::abs(x - e) <= eps || std::abs(x + e) <= eps) {
        out.notes.push_back("rectangles: denominator xi-eta or xi+eta vanishes; family omitted");
      } else {
        double y0 = t / (x - e);
        double rad = -(beta + t * t * x / ((x - e) * (x - e))) / (x + e);
        if (rad >= 0.0) {
          double s = std::sqrt(rad);
          // Only sign patterns with a positive product of the paired entries solve the system.
          for (int k = 0; k < 3; ++k) {
            for (double sg : {1.0, -1.0}) {
              std::vector<double> c(3, sg * s);
              c[k] = y0;
              emit(std::string(sg > 0 ? "+" : "-") + "p" + std::to_string(k + 5), c,
                   Pattern::Rectangle);
            }
          }
        }
      }
      out.notes.push_back("sign flips of two amplitudes map each state to a translate; representatives listed");
      break;
    }
    case ReductionCase::Mult6ResonantGeneral:
      break;
  }
  return out;
}

JacobianSpectrum jacobian_spectrum(const ReducedCoefficients& rc, const Equilibrium& eq) {
  Matrix J = reduced_jacobian(rc, eq.coordinates);
  JacobianSpectrum js;
  js.values = closed_form_eigenvalues(J);
  js.closed_form = true;
  SymEigen num = jacobi_eigen(J);
  js.vectors = num.vectors;
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven && eq.pattern == Pattern::Roll) {
    // The roll Jacobian splits into e_k and the symmetric/antisymmetric pair
    // of the two silent modes.
    int k = 0;
    while (k < 3 && eq.coordinates[k] == 0.0) ++k;
    int i = (k + 1) % 3, j = (k + 2) % 3;
    if (i > j) std::swap(i, j);
    double d = J[i][i], o = J[i][j];
    std::vector<double> ek(3, 0.0), sym(3, 0.0), anti(3, 0.0);
    ek[k] = 1.0;
    sym[i] = 1.0;
    sym[j] = 1.0;
    anti[i] = -1.0;
    anti[j] = 1.0;
    std::vector<std::pair<double, std::vector<double>>> pairs{
        {J[k][k], ek}, {d + o, sym}, {d - o, anti}};
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    js.values.clear();
    js.vectors.clear();
    for (auto& p : pairs) {
      js.values.push_back(p.first);
      js.vectors.push_back(p.second);
    }
  }
  return js;
}

namespace {

void classify_spectrum(Equilibrium& e, const JacobianSpectrum& js) {
  e.jacobian_eigenvalues = js.values;
  double scale = 1e-300;
  for (double v : js.values) scale = std::max(scale, std::abs(v));
  const double tol = 1e-10 * scale;
  int pos = 0, neg = 0;
  e.unstable_directions.clear();
  for (std::size_t i = 0; i < js.values.size(); ++i) {
    if (js.values[i] > tol) {
      ++pos;
      e.unstable_directions.push_back(js.vectors[i]);
    } else if (js.values[i] < -tol) {
      ++neg;
    }
  }
  e.unstable_count = pos;
  int n = static_cast<int>(js.values.size());
  if (pos + neg < n) e.stability = Stability::Marginal;
  else if (pos == 0) e.stability = Stability::Stable;
  else if (neg == 0) e.stability = Stability::Unstable;
  else e.stability = Stability::Saddle;
}

}  // namespace

StabilityReport stability_report(const ReducedCoefficients& rc) {
  StabilityReport rep;
  if (!(rc.beta > 0.0)) {
    rep.pre_transition = true;
    const int n = dimension(rc);
    Equilibrium e{"p0", std::vector<double>(n, 0.0), Pattern::Trivial};
    JacobianSpectrum js{std::vector<double>(n, rc.beta), {}, true};
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(n, 0.0);
      v[i] = 1.0;
      js.vectors.push_back(v);
    }
    classify_spectrum(e, js);
    rep.states.push_back(e);
    rep.notes.push_back("lambda <= lambda0: only the basic state is reported");
    return rep;
  }
  EquilibriumSet set = fixed_points(rc);
  rep.notes = set.notes;
  for (auto& e : set.states) {
    classify_spectrum(e, jacobian_spectrum(rc, e));
    rep.states.push_back(e);
  }
  if (rc.reduction_case == ReductionCase::Mult6ResonantEven && rc.xi < 0.0) {
    double w = std::abs(rc.tau) * std::sqrt(-rc.xi / rc.beta);
    rep.rolls.available = true;
    rep.rolls.lower = rc.xi - w;
    rep.rolls.upper = rc.xi + w;
    rep.rolls.regime = rc.eta < rep.rolls.lower ? 1 : (rc.eta < rep.rolls.upper ? 2 : 3);
  }
  return rep;
}

}  // namespace chlat
