#include "fides/fracquad/gamma.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fides::quad {
namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos(double x) {
  // Gamma(x) for x >= 0.5.
  const double z = x - 1.0;
  double a = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  // Split the power so t^(z+0.5) does not overflow before the exp(-t) factor.
  const double half = std::pow(t, 0.5 * (z + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * a;
}

double sin_pi(double x) {
  // sin(pi x) with the argument reduced to [-0.5, 0.5] first.
  double r = std::remainder(x, 2.0);
  if (r > 0.5) {
    r = 1.0 - r;
  } else if (r < -0.5) {
    r = -1.0 - r;
  }
  return std::sin(std::numbers::pi * r);
}

}  // namespace

double gamma(double x) {
  if (std::isnan(x)) return x;
  if (x <= 0.0 && x == std::floor(x)) {
    throw std::domain_error("gamma: pole at x = " + std::to_string(static_cast<long long>(x)));
  }
  if (x == std::floor(x) && x <= 171.0) {
    double f = 1.0;
    for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
    return f;
  }
  if (x >= 0.5) {
    if (x > 171.7) return std::numeric_limits<double>::infinity();
    return lanczos(x);
  }
  return std::numbers::pi / (sin_pi(x) * lanczos(1.0 - x));
}

}  // namespace fides::quad
