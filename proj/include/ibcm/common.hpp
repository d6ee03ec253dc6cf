#pragma once

#include <Eigen/Dense>

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ibcm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorKind {
  InvalidInput,
  OutOfDomain,
  NumericalFailure,
  SingularGeometry,
  SingularCurve,
  RefineRequired,
  InvalidOffset,
  InvalidMaterial,
  InvalidLoad,
  Unsupported,
  SegmentationFailure,
  AssemblyFailure,
  CannotCoupleStrongly,
  GeometryFailure,
  ContractViolation,
  NotApplicable,
  ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

/// Gauss-Legendre rule with n points on [0,1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussRule& gauss01(int n);

/// Number of worker threads for data-parallel loops, read from IBCM_THREADS (default 1).
int worker_threads();

/// Index of the symmetric second derivative (a,b) in {11,12,22} storage.
constexpr int d2(int a, int b) { return a + b; }
/// Index of the symmetric third derivative (a,b,c) in {111,112,122,222} storage.
constexpr int d3(int a, int b, int c) { return a + b + c; }

}  // namespace ibcm
