#pragma once

namespace fides::quad {

/// Euler gamma function.
///
/// Lanczos approximation (g = 7, nine terms) for x >= 0.5 and the reflection
/// formula below that. Positive integers up to 171 return the exact factorial
/// so integer-order prefactors such as Gamma(3) = 2 are bit-exact.
/// Throws std::domain_error at the poles x = 0, -1, -2, ...
double gamma(double x);

}  // namespace fides::quad
