#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chlat {

enum class ErrorCode {
  DegenerateLattice,
  CardinalityOutOfModel,
  WrongMultiplicity,
  InvalidConcentration,
  InvalidParameter,
  NonpositiveGamma3,
  ZeroMode,
  PesViolation,
  ResonantDenominator,
  QuadratureUnderResolved,
  UnsupportedCase,
  DegenerateCoefficients,
  PreTransition,
  BlowUp,
  NotConverged,
  UnderResolved,
  IoFailure,
  ConfigError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }
  const char* name() const { return error_name(code_); }

 private:
  ErrorCode code_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double kPi = 3.14159265358979323846;

}  // namespace chlat
