#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nmqsd {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

// Two-qubit operators and states. Basis order is global and fixed:
// index 0 <-> |11>, 1 <-> |10>, 2 <-> |01>, 3 <-> |00>  (first label = qubit A).
using Operator4 = Eigen::Matrix4cd;
using PureState4 = Eigen::Vector4cd;
using DensityMatrix4 = Eigen::Matrix4cd;

namespace basis {
inline constexpr int k11 = 0;
inline constexpr int k10 = 1;
inline constexpr int k01 = 2;
inline constexpr int k00 = 3;
}  // namespace basis

/// Invalid input or configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Divergence, non-finite values or a physicality violation (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nmqsd
