#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace bect {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Invalid user input: bad schemas, violated preconditions on parameters.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical stage failed (non-convergence, under-resolution, rank drop...).
/// Carries the stage tag so the CLI can report where the pipeline broke.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Reduce an angle-like coordinate to [0, 2*pi).
inline double wrap_two_pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y;
}

/// Reduce to [-pi, pi).
inline double wrap_pi(double x) {
  double y = std::fmod(x + kPi, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y - kPi;
}

}  // namespace bect
