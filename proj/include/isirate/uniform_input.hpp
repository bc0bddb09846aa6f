#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "isirate/input_model.hpp"
#include "isirate/logsnr.hpp"
#include "isirate/scalar_channel.hpp"

namespace isirate {

// Unit-power input uniform on the square [-sqrt(3/2), sqrt(3/2)]^2. Each real
// component is uniform on [-A/2, A/2] with A = sqrt(6) and sees the real
// channel y = x + n / sqrt(gamma), n ~ N(0, 1/2).
constexpr double kUniformWidth = 2.44948974278317809820;  // sqrt(6)

// Component quantities, real channel.
double uniform_component_mmse(double gamma);
// Both forms of the component mmse, exposed for the consistency check.
double uniform_component_mmse_gform(double gamma);
double uniform_component_mmse_variance_form(double gamma);
// E[phi^2], so that the component derivative is -2 E[phi^2].
double uniform_component_phi2(double gamma);

// Complex (two-component) quantities.
double uniform_mmse(double gamma);
double uniform_dmmse(double gamma);
double uniform_info(double gamma);

// log(pi e / 6): high-SNR gap to the Gaussian-input curve, in nats.
double shaping_offset();

class UniformInput : public InputModel {
 public:
  std::string name() const override { return "inf-QAM"; }
  ScalarPoint evaluate(double gamma) const override;
  double info(double gamma) const override { return uniform_info(gamma); }
  double entropy_nats() const override { return INFINITY; }
};


// Sample mean of (X - E[X|Y])^2 for the complex input, seeded.
McEstimate mc_uniform_mmse(double gamma, std::int64_t n_samples, std::uint64_t seed);

// Profile on [0, zeta_end] whose ilog is the cumulative integral of dilog.
LogSnrProfile build_uniform_profile(double zeta_end, double resolution_bits);

struct UniformStructure {
  LogSnrProfile profile;
  ConcavityThresholds thresholds;
  double zeta0_low = 0.0;
  // Convex envelope: line through the origin touching ilog at zeta2_tilde.
  double zeta2_tilde = 0.0;
  double tilde_slope = 0.0;
  double zeta_m_tilde = 0.0;
  double delta_tilde_nats = 0.0;
  double shaping_offset = 0.0;
  // Largest gap between the convex envelope and ilog seen on the grid.
  double grid_convex_gap = 0.0;
};
UniformStructure uniform_structure(double zeta_end = 25.0, double resolution_bits = 5e-4);

// Single sign change of ddilog, by bisection.
double uniform_zeta0_low();

struct DeltaBar {
  double gamma_bar = 0.0;
  double value_nats = 0.0;
  double zeta1_low = 0.0;
  double zeta_m = 0.0;
  double slope = 0.0;
};
DeltaBar deltabar(double gamma_bar);
std::vector<DeltaBar> deltabar_curve(const std::vector<double>& gamma_db);

struct ConvexityCertificate {
  double c1 = 0.0;
  double c2 = 0.0;
  double c0 = 0.0;
  double k0 = 0.0;
  double k2 = 0.0;
  double k = 0.0;
  // Smallest gamma in the scanned range above which the sufficient
  // condition is non-negative; NaN when it never becomes positive.
  double threshold_gamma = 0.0;
  double threshold_gamma_alt_k = 0.0;
  double alt_k = 0.0;
  double max_quadrature_error = 0.0;
};
double convexity_condition(const ConvexityCertificate& c, double k, double gamma);
// alt_k lets the caller compare against another value of k(A).
ConvexityCertificate convexity_certificate(double gamma_lo, double gamma_hi, double alt_k = 0.586);

}  // namespace isirate
