#pragma once

#include <stdexcept>
#include <string>

namespace fides {

/// Invalid user configuration: sizes, schedules, unknown order names, bad CLI values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Array shape disagrees with the declared grid or network dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature order outside the range the product-trapezoid scheme supports (order <= -1).
class UnsupportedOrderError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A loss, residual or gradient evaluated to NaN or infinity.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fides
