#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spaasim {

using Complex = std::complex<double>;

// Complex field amplitudes, one per waveguide port.
using SignalVector = Eigen::VectorXcd;

// Dense complex transfer matrix (unitary for lossless devices).
using TransferMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Violated call contract: dimension mismatches, out-of-range arguments.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Semantically invalid data: non-unitary input, bad config values.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: singular denominators, non-convergence.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wrap an angle into [0, 2*pi).
inline double wrap_two_pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;  // fmod rounding can land exactly on 2*pi
  return y;
}

// Wrap an angle into (-pi, pi].
inline double wrap_pm_pi(double x) {
  double y = std::remainder(x, kTwoPi);
  if (y <= -kPi) y += kTwoPi;
  return y;
}

// Distance between two angles on the circle, in [0, pi].
inline double wrapped_distance(double a, double b) {
  double d = std::fabs(wrap_pm_pi(a - b));
  return d > kPi ? kTwoPi - d : d;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

}  // namespace spaasim
