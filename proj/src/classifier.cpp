#include "chlat/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace chlat {

const char* transition_name(TransitionType t) {
  switch (t) {
    case TransitionType::TypeI: return "TypeI";
    case TransitionType::TypeII: return "TypeII";
    case TransitionType::Boundary: return "Boundary";
  }
  return "Unknown";
}

const char* flow_name(LineFlow f) {
  switch (f) {
    case LineFlow::Approach: return "approach";
    case LineFlow::Depart: return "depart";
    case LineFlow::Neutral: return "neutral";
  }
  return "unknown";
}

namespace {

LineFlow flow_of(const std::vector<double>& c) {
  if (std::all_of(c.begin(), c.end(), [](double v) { return v < 0.0; })) return LineFlow::Approach;
  if (std::any_of(c.begin(), c.end(), [](double v) { return v > 0.0; })) return LineFlow::Depart;
  return LineFlow::Neutral;
}

LineReport line(std::string id, std::vector<double> c, int order = 3) {
  LineReport l{std::move(id), std::move(c), order, LineFlow::Neutral};
  l.flow = flow_of(l.coefficients);
  return l;
}

TransitionType by_margin(double margin, double gamma3) {
  double tol = 1e-12 * std::max(1.0, std::abs(gamma3));
  if (margin > tol) return TransitionType::TypeI;
  if (margin < -tol) return TransitionType::TypeII;
  return TransitionType::Boundary;
}

}  // namespace

std::vector<LineReport> straight_line_report(const ReducedCoefficients& rc) {
  const double x = rc.xi, e = rc.eta, c = rc.chi, w = rc.omega;
  switch (rc.reduction_case) {
    case ReductionCase::Mult2:
    case ReductionCase::LongRangeMult2:
      return {line("r", {e})};
    case ReductionCase::Mult4:
      return {line("r1=0", {x}), line("r2=0", {x}), line("r1=r2", {x + e})};
    case ReductionCase::Mult6NonResonant:
      return {line("r2=r3=0", {x}),
              line("r1=r3=0", {x}),
              line("r1=r2=0", {x}),
              line("r1=r2,r3=0", {x + e}),
              line("r1=r3,r2=0", {x + c}),
              line("r2=r3,r1=0", {x + w}),
              line("r1=r2=r3", {x + e + c, x + e + w, x + c + w})};
    case ReductionCase::Mult6ResonantEven: {
      std::vector<LineReport> out{line("y2=y3=0", {x}), line("y1=y3=0", {x}),
                                  line("y1=y2=0", {x})};
      if (rc.tau != 0.0) {
        out.push_back(line("y1=y2=y3", {rc.tau}, 2));
      } else {
        out.push_back(line("y1=y2=y3", {x + 2.0 * e}));
      }
      return out;
    }
    case ReductionCase::Mult6ResonantGeneral:
      break;
  }
  return {};
}

TransitionVerdict classify(const ReducedCoefficients& rc, const ModelParams& params) {
  TransitionVerdict v;
  v.reduction_case = rc.reduction_case;
  const double g2 = params.gamma2, g3 = params.gamma3;
  switch (rc.reduction_case) {
    case ReductionCase::Mult6ResonantGeneral:
      throw Error(ErrorCode::UnsupportedCase,
                  "the resonant system without evenness is not classified");
    case ReductionCase::Mult6ResonantEven: {
      v.threshold = g2 == 0.0 ? 0.0 : 2.0 * g2 * g2 / (9.0 * rc.norm2);
      v.margin = g3 - v.threshold;
      if (g2 < 0.0) {
        v.transition_type = TransitionType::TypeII;
        v.notes.push_back("gamma2<0: the diagonal line y1=y2=y3 leaves the origin through the quadratic term");
      } else {
        v.transition_type = by_margin(v.margin, g3);
        if (g2 > 0.0) {
          v.notes.push_back("gamma2>0: the diagonal line attracts through the quadratic term (tau<0); "
                            "the verdict is set by the cubic coefficient xi on the axes");
        }
      }
      return v;
    }
    default:
      break;
  }
  v.threshold = rc.a_constant * g2 * g2;
  v.margin = g3 - v.threshold;
  v.transition_type = by_margin(v.margin, g3);
  if (v.transition_type == TransitionType::TypeII) {
    for (const auto& l : straight_line_report(rc)) {
      if (l.flow == LineFlow::Depart) v.notes.push_back("line " + l.id + " departs from the origin");
    }
  }
  return v;
}

}  // namespace chlat
