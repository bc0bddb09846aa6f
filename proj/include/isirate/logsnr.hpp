#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "isirate/input_model.hpp"

namespace isirate {

struct LogSnrProfile {
  std::string input_name;
  std::vector<double> zeta_grid;  // nats, zeta = log(1 + gamma)
  std::vector<double> ilog;
  std::vector<double> dilog;   // (1 + gamma) mmse
  std::vector<double> ddilog;  // (1 + gamma) [mmse + (1 + gamma) mmse']
  std::vector<double> gap;     // entropy - ilog
  double zeta_max = 0.0;
  double entropy_nats = 0.0;
  double resolution_bits = 0.0;
};

struct ProfileOptions {
  double resolution_bits = 5e-4;
  double saturation_eps = 1e-7;
  double zeta_limit = 60.0;
};

struct LogPoint {
  double zeta, ilog, dilog, ddilog, gap;
};

LogPoint log_point(const InputModel& model, double zeta);

// Grid from 0 until the input saturates (finite alphabets).
LogSnrProfile build_profile(const InputModel& model, const ProfileOptions& opt = {});
// Grid over [0, zeta_end] without a saturation requirement.
LogSnrProfile build_profile_range(const InputModel& model, double zeta_end, double resolution_bits);
// Serial reference for build_profile.
LogSnrProfile build_profile_serial(const InputModel& model, const ProfileOptions& opt = {});

struct ConcavityThresholds {
  bool concave_everywhere = false;
  double zeta0_low = 0.0;   // first concave-to-convex change
  double zeta0_high = 0.0;  // last convex-to-concave change; +inf if the grid ends convex
  std::vector<double> crossings;
  bool anomaly = false;     // more than two sign changes
  bool borderline = false;  // |ddilog| <= 1e-10 somewhere away from saturation
  double max_ddilog = 0.0;
};

ConcavityThresholds concavity_thresholds(const LogSnrProfile& p, const InputModel& model);

struct Bridge {
  double zeta1 = 0.0;
  double zeta2 = 0.0;
  double slope = 0.0;
  double zeta_m = 0.0;
  double delta = 0.0;  // nats
  double tangency_mismatch = 0.0;  // |dilog(zeta1) - dilog(zeta2)|
};

struct ConcavityReport {
  std::string input_name;
  double dmin_half_sq_db = 0.0;
  ConcavityThresholds thresholds;
  double zeta1_low = 0.0;
  double zeta2_high = 0.0;
  double delta_x_nats = 0.0;
  std::vector<Bridge> bridges;
  bool bridge_count_flag = false;  // more than one bridge
  double zeta_max = 0.0;
};

// Upper concave hull of (x, y): index ranges [i, j] of maximal bridges where
// the hull exceeds y by more than tol.
std::vector<std::pair<int, int>> hull_bridges(const std::vector<double>& x, const std::vector<double>& y,
                                              double tol = 1e-12);
std::vector<double> hull_values(const std::vector<double>& x, const std::vector<double>& y);

ConcavityReport concave_envelope(const LogSnrProfile& p, const InputModel& model);
double delta_x(const LogSnrProfile& p, const ConcavityReport& report, const InputModel& model);

struct SearchSpec {
  double gamma_lo = 1e-2;
  double gamma_hi = 1e4;
  int coarse_points = 160;
};

// Objective value of the chord from zeta1 to zeta2 above ilog at zeta.
double chord_gap(const InputModel& model, double g1, double g, double g2);
double delta_x_direct(const InputModel& model, const SearchSpec& spec);

std::string report_json(const ConcavityReport& r);

inline double zeta_to_db(double zeta) { return 10.0 * std::log10(std::expm1(zeta)); }
inline double db_to_zeta(double db) { return std::log1p(std::pow(10.0, db / 10.0)); }

}  // namespace isirate
