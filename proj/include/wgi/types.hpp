#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wgi {

using cplx = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr cplx kI{0.0, 1.0};

/// Invalid input: malformed files, violated invariants, bad arguments.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: cutoff modes, divergence, non-convergence in hard mode.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Terminating waveguide has the perfectly conducting end wall at x3 = 0.
enum class Variant { terminating, infinite };

inline const char* to_string(Variant v) {
  return v == Variant::terminating ? "terminating" : "infinite";
}

}  // namespace wgi
