#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "isirate/constellation.hpp"

namespace isirate {

// Series value together with the number of terms kept and the tail majorant
// of the dropped terms.
struct SeriesValue {
  double value = 0.0;
  int terms = 0;
  double tail_bound = 0.0;
};

// All functions below take rho = (d/2)^2 gamma > 0.
SeriesValue b_up_series(double rho);
SeriesValue d_up_series(double rho);
double b_up(double rho);
double b_low(double rho);
double c_up(double rho);
double c_low(double rho);
double d_up(double rho);
double d_up_majorant(double rho);

// BPSK on the real channel y = x + n / sqrt(gamma), n ~ N(0, 1/2).
double bpsk_mmse_closed(double gamma);
double bpsk_dmmse_closed(double gamma);
inline double phi_bpsk(double y, double gamma) {
  const double c = std::cosh(2.0 * gamma * y);
  return 1.0 / (c * c);
}

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v, double rel_tol = 0.0, double abs_tol = 0.0) const {
    const double slack = rel_tol * std::max(std::fabs(lower), std::fabs(upper)) + abs_tol;
    return v >= lower - slack && v <= upper + slack;
  }
};

// mmse_asymptotic / mmse_algebraic bound mmse; dmmse_* bound -mmse'.
struct BpskBoundPairs {
  Bracket mmse_asymptotic;
  Bracket mmse_algebraic;
  Bracket neg_dmmse_asymptotic;
  Bracket neg_dmmse_algebraic;
};
BpskBoundPairs bpsk_bound_pairs(double gamma);

// Posterior variance bracket for uniform M-PAM with spacing d at real y.
Bracket pam_pointwise_bracket(int m, double d, double y, double gamma);
// True when dropping the level farthest from y does not increase the
// posterior variance.
bool verify_removal_lemma(int m, double d, double y, double gamma);

Bracket pam_mmse_bracket(int m, double d, double gamma);
Bracket pam_dmmse_bracket(int m, double d, double gamma);

struct DecayFit {
  double slope = 0.0;
  double reference = 0.0;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  int points = 0;
  bool range_shrunk = false;
};
// Least-squares slope of log(-mmse' sqrt(gamma)) against gamma. Default range
// is (d_min/2)^2 gamma in [4, 12].
DecayFit decay_rate_check(const Constellation& c, double gamma_lo = 0.0, double gamma_hi = 0.0,
                          int points = 17);

struct SweepRow {
  int m = 0;
  double d = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool pass = false;
};
// Sweep of the mmse and derivative brackets against the quadrature values,
// plus pointwise checks; rows carry quantity labels in the same order.
struct BoundSweep {
  std::vector<SweepRow> rows;
  std::vector<const char*> quantity;
  bool all_pass() const;
};
BoundSweep verify_pam_brackets(const std::vector<int>& sizes, double d, double rho_min,
                               double rho_max, int gamma_points, int y_samples);
void write_sweep_csv(const BoundSweep& s, const std::string& path);

}  // namespace isirate
