#include <map>

#include "chlat/cli.hpp"

namespace chlat {

namespace {

// Square lattice with |k_c|^2 = 2500; lambda is set relative to the threshold.
const char* kSquare = R"(
[lattice]
l1 = pi/25, 0
l2 = 0, pi/25
[params]
lambda = auto:1.002
gamma2 = 1
)";

// Parallelogram whose shell is the single pair k2 - k1.
const char* kParallelogram = R"(
[lattice]
l1 = pi/25, -sqrt(3)*pi/25
l2 = 0, 2*pi/25
[params]
lambda = auto:1.01
gamma2 = 1
gamma3 = -(7 - 6*sqrt(3))/(18 - 9*sqrt(3))
)";

// Hexagonal shell k1, k2, k1 + k2 with |k|^2 = 2500. Representatives are
// ordered (0,1), (1,0), (1,1), so +p1 lives on k2 and +p2 on k1.
const char* kHexagonal = R"(
[lattice]
l1 = pi/25, -sqrt(3)*pi/75
l2 = 0, -2*sqrt(3)*pi/75
[params]
lambda = 2501
gamma2 = 1
gamma3 = 2
even = true
)";

const std::map<std::string, std::pair<const char*, const char*>>& figures() {
  // Coordinates follow the representative order (0,1) then (1,0).
  static const std::map<std::string, std::pair<const char*, const char*>> f{
      {"fig5.2", {kSquare, "gamma3 = 17/450\n[render]\nsource = coordinates\ncoordinates = 1, 0\nphases = pi/4, 0\ntiles1 = 2\ntiles2 = 2\n"}},
      {"fig5.3", {kSquare, "gamma3 = 17/450\n[render]\nsource = coordinates\ncoordinates = 0, 1\nphases = 0, pi/4\ntiles1 = 2\ntiles2 = 2\n"}},
      {"fig5.4", {kSquare, "gamma3 = 569/445500\n[render]\nsource = coordinates\ncoordinates = 1, 1\nphases = pi/4, pi/4\ntiles1 = 2\ntiles2 = 2\n"}},
      {"fig6.1", {kParallelogram, "[render]\nsource = coordinates\ncoordinates = 1\nphases = pi/6\ntiles1 = 2\ntiles2 = 2\ngeometry = physical\nwidth = 256\nheight = 512\n"}},
      {"fig8.1", {kHexagonal, "[render]\nequilibrium = +p2\ntiles1 = 3\ntiles2 = 3\ngeometry = physical\nwidth = 400\nheight = 693\n"}},
      {"fig8.2", {kHexagonal, "[render]\nequilibrium = +p1\ntiles1 = 3\ntiles2 = 3\ngeometry = physical\nwidth = 400\nheight = 693\n"}},
      {"fig8.3", {kHexagonal, "[render]\nequilibrium = p4+\ntiles1 = 3\ntiles2 = 3\ngeometry = physical\nwidth = 400\nheight = 693\n"}},
  };
  return f;
}

}  // namespace

RunConfig figure_config(const std::string& figure_id) {
  auto it = figures().find(figure_id);
  if (it == figures().end()) {
    std::string known;
    for (const auto& [k, v] : figures()) known += (known.empty() ? "" : ", ") + k;
    throw Error(ErrorCode::ConfigError, "unknown figure '" + figure_id + "' (known: " + known + ")");
  }
  return parse_ini(std::string(it->second.first) + it->second.second);
}

}  // namespace chlat
