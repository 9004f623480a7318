#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace brodylab {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Diameter of CP^N in the unit-area normalization (CP^1 has area 1).
inline double fs_diameter() { return std::sqrt(kPi) / 2.0; }

struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidPoint : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedCurve : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnsupportedMeasure : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NotLocallyConstant : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TargetUnreachable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace brodylab
