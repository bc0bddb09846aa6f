#include "isirate/special.hpp"

#include <cmath>
#include <limits>

namespace isirate {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// exp(x^2) accurate to a few ulp even when x^2 is large.
double exp_sq(double x) {
  double h = x * x;
  double l = std::fma(x, x, -h);
  return std::exp(h) * (1.0 + l);
}

double erfcx_asymptotic(double x) {
  // 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
  double inv = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 10; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
  }
  return kInvSqrtPi * sum / x;
}

}  // namespace

double exp_neg_half_sq(double x) {
  double h = x * x;
  double l = std::fma(x, x, -h);
  return std::exp(-0.5 * h) * (1.0 - 0.5 * l);
}

double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) {
    if (x < -26.6) return std::numeric_limits<double>::infinity();
    return 2.0 * exp_sq(x) - erfcx(-x);
  }
  if (x < 26.0) return exp_sq(x) * std::erfc(x);
  return erfcx_asymptotic(x);
}

double q_scaled(double x) {
  if (x >= 0.0) return 0.5 * erfcx(x * kInvSqrt2);
  return 1.0 / exp_neg_half_sq(x) - 0.5 * erfcx(-x * kInvSqrt2);
}

double q_function(double x) {
  if (x >= 0.0) {
    if (x < 1.0) return 0.5 * std::erfc(x * kInvSqrt2);
    return 0.5 * erfcx(x * kInvSqrt2) * exp_neg_half_sq(x);
  }
  return 1.0 - q_function(-x);
}

double log_q(double x) {
  if (x >= 0.0) return std::log(0.5 * erfcx(x * kInvSqrt2)) - 0.5 * x * x;
  return std::log1p(-q_function(-x));
}

double q_diff(double a, double b) {
  if (!(a < b)) return 0.0;
  if (a >= 0.0) {
    // Both in the upper tail: factor out the larger term.
    double qa = q_scaled(a);
    double qb = q_scaled(b);
    double ratio = std::exp(-0.5 * (b - a) * (b + a));
    return exp_neg_half_sq(a) * (qa - qb * ratio);
  }
  if (b <= 0.0) return q_diff(-b, -a);
  return 1.0 - q_function(-a) - q_function(b);
}

}  // namespace isirate
