#include "pif/special.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pif {

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: x must be positive, got " + std::to_string(x));
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // Bernoulli-number series in 1/x^2; at x >= 10 the truncation error is
  // below 1e-17.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = inv2 * (1.0 / 12.0 -
                  inv2 * (1.0 / 120.0 -
                  inv2 * (1.0 / 252.0 -
                  inv2 * (1.0 / 240.0 -
                  inv2 * (1.0 / 132.0)))));
  return result + std::log(x) - 0.5 * inv - series;
}

double poisson_loglik(long y, double lambda, double floor) {
  const double lam = lambda > floor ? lambda : floor;
  return static_cast<double>(y) * std::log(lam) - lam - std::lgamma(static_cast<double>(y) + 1.0);
}

}  // namespace pif
