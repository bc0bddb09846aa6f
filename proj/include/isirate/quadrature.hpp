#pragma once

#include <vector>

namespace isirate {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes/weights for E[f(t)] with t ~ N(0, 1/2), i.e. weight exp(-t^2)/sqrt(pi).
// Weights sum to 1. Cached per order; thread-safe.
const GaussRule& gauss_hermite(int n);

// Gauss-Legendre on [-1, 1].
const GaussRule& gauss_legendre(int n);

// Append the n-point Legendre rule mapped to [a, b], weights multiplied by
// the Gaussian density exp(-t^2)/sqrt(pi).
void append_gaussian_panel(GaussRule& rule, double a, double b, int n);

// Legendre rule on [a, b] with no weight function.
void append_panel(GaussRule& rule, double a, double b, int n);

}  // namespace isirate
