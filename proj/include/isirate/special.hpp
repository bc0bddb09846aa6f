#pragma once

namespace isirate {

// exp(x^2) * erfc(x)
double erfcx(double x);

// Upper tail of the standard normal.
double q_function(double x);

// exp(x^2/2) * Q(x); finite for all x >= 0.
double q_scaled(double x);

double log_q(double x);

// Q(a) - Q(b) for a < b, without cancellation when both tails are tiny.
double q_diff(double a, double b);

// exp(-x^2/2) with the square split to keep full relative accuracy.
double exp_neg_half_sq(double x);

}  // namespace isirate
