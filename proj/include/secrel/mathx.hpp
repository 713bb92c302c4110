#pragma once

#include <cmath>

namespace secrel {

// digamma via recurrence + asymptotic expansion (Abramowitz & Stegun 6.3.18).
inline double digamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv;
  result -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

inline double trigamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

// Minka's initialization followed by Newton steps.
inline double inverse_digamma(double y) {
  double x = (y >= -2.22) ? std::exp(y) + 0.5 : -1.0 / (y + 0.57721566490153286);
  for (int i = 0; i < 8; ++i) {
    x -= (digamma(x) - y) / trigamma(x);
    if (x <= 0.0) x = 1e-10;
  }
  return x;
}

}  // namespace secrel
