#pragma once

#include <string>
#include <vector>

#include "chlat/reduction.hpp"

namespace chlat {

enum class TransitionType { TypeI, TypeII, Boundary };
const char* transition_name(TransitionType t);

struct TransitionVerdict {
  TransitionType transition_type = TransitionType::Boundary;
  double threshold = 0.0;  // critical gamma3
  double margin = 0.0;     // gamma3 - threshold
  ReductionCase reduction_case = ReductionCase::Mult2;
  std::vector<std::string> notes;
};

TransitionVerdict classify(const ReducedCoefficients& rc, const ModelParams& params);

enum class LineFlow { Approach, Depart, Neutral };
const char* flow_name(LineFlow f);

struct LineReport {
  std::string id;
  std::vector<double> coefficients;  // one per nonzero component
  int order = 3;                     // leading power of the radial flow
  LineFlow flow = LineFlow::Neutral;
};

// Invariant straight lines of the reduced system at the threshold (beta = 0).
std::vector<LineReport> straight_line_report(const ReducedCoefficients& rc);

}  // namespace chlat
