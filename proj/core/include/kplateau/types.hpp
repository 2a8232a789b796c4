#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>
#include <string_view>

namespace kp {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class ErrorKind {
  InvalidInput,
  OutOfSection,
  NotClosed,
  CurvesTouch,
  DegenerateProjection,
  OffsetTooLarge,
  ProbeConstructionFailed,
  ResolutionError,
  GradientUndefined,
  InitFailed,
  DegenerateMesh,
  CertificateLost,
  InitInadmissible,
  InvariantBroken,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace kp
