#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isirate/constellation.hpp"
#include "isirate/input_model.hpp"

namespace isirate {

enum class QuadMethod { HERMITE_2D, SEPARABLE_1D };

const char* to_string(QuadMethod m);

struct QuadConfig {
  int order = 96;
  // Forces the 2D path for separable constellations when set.
  bool force_2d = false;
  // Upper limit on the per-dimension Hermite order used by the 2D path at high SNR.
  int max_order_2d = 600;
};

// Per-real-component expectations: E[gap], E[phi], E[phi^2].
struct ComponentStats {
  double gap = 0.0;
  double mmse = 0.0;
  double phi2 = 0.0;
};

// Kernel for a real alphabet observed as v = sqrt(gamma) a + t, t ~ N(0, 1/2).
class RealKernel {
 public:
  RealKernel(RealAlphabet alphabet, int order);
  ComponentStats evaluate(double gamma) const;
  const RealAlphabet& alphabet() const { return alpha_; }

 private:
  struct Orbit {
    int rep;
    double weight;
  };
  void symbol_terms(int k, double gamma, ComponentStats& out) const;

  RealAlphabet alpha_;
  std::vector<double> logp_;
  std::vector<Orbit> orbits_;
  int order_;
  double prune_;
};

struct Derivative2D {
  double e_phi2 = 0.0;
  double e_psi2 = 0.0;  // E|psi|^2
  double e_phi = 0.0;
};

class ScalarChannel : public InputModel {
 public:
  explicit ScalarChannel(Constellation c, QuadConfig cfg = {});

  std::string name() const override { return c_.name; }
  ScalarPoint evaluate(double gamma) const override;
  double entropy_nats() const override { return entropy_; }

  const Constellation& constellation() const { return c_; }
  QuadMethod method() const { return method_; }
  int quad_order() const { return cfg_.order; }
  // Number of symbols actually integrated after symmetry reduction.
  std::size_t orbit_count() const;
  // Moments entering the two candidate complex derivative identities (2D path).
  Derivative2D derivative_terms(double gamma) const;

 private:
  struct Orbit {
    int rep;
    double weight;
  };
  ScalarPoint evaluate_2d(double gamma, Derivative2D* diag) const;
  int order_2d(double gamma) const;

  Constellation c_;
  QuadConfig cfg_;
  QuadMethod method_;
  double entropy_;
  double dmin_;
  std::vector<RealKernel> kernels_;  // separable path: re, im (im may be absent)
  bool same_components_ = false;
  std::vector<double> logp_;
  std::vector<Orbit> orbits_;
};

struct PointwiseStats {
  double phi = 0.0;
  cplx psi = 0.0;
};

double mmse(const Constellation& c, double gamma, int quad_order = 96);
double mutual_info(const Constellation& c, double gamma, int quad_order = 96);
double mmse_derivative(const Constellation& c, double gamma, int quad_order = 96);
// Centered difference with Richardson extrapolation; used for non-separable inputs.
double mmse_derivative_fd(const ScalarChannel& ch, double gamma);

// Posterior of x given y on the input scale: p(x_m | y) ~ p_m exp(-gamma |y - x_m|^2).
PointwiseStats pointwise(const Constellation& c, cplx y, double gamma);
// Same posterior variance for a real alphabet and real y.
double pointwise_real(const RealAlphabet& a, double y, double gamma);

// Real PAM with arbitrary spacing d (not normalized), real channel.
RealAlphabet pam_alphabet(int m, double d);
double pam_mmse(int m, double d, double gamma, int quad_order = 96);
double pam_dmmse(int m, double d, double gamma, int quad_order = 96);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

McEstimate mc_oracle_mmse(const Constellation& c, double gamma, std::int64_t n_samples,
                          std::uint64_t seed);

struct GridSpec {
  double db_lo = -20.0;
  double db_hi = 20.0;
  int count = 200;
};

std::vector<double> db_grid(const GridSpec& g);

struct ScalarCurve {
  std::string constellation_ref;
  std::vector<double> gamma_grid;
  std::vector<double> info_nats;
  std::vector<double> mmse;
  std::vector<double> dmmse;
  int quad_order = 96;
  QuadMethod method = QuadMethod::SEPARABLE_1D;
};

// Parallel over grid points.
ScalarCurve tabulate(const ScalarChannel& ch, const GridSpec& g);
// Serial reference with identical per-point arithmetic.
ScalarCurve tabulate_serial(const ScalarChannel& ch, const GridSpec& g);

void write_curve_csv(const ScalarCurve& curve, const std::string& path,
                     const std::string& config_json = "{}");

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double x) { return 10.0 * std::log10(x); }
inline double nats_to_bits(double x) { return x / std::log(2.0); }
inline double bits_to_nats(double x) { return x * std::log(2.0); }

}  // namespace isirate
