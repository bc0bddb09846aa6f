#pragma once

#include <cmath>
#include <string>

namespace isirate {

// Scalar-channel quantities at one SNR; info and gap in nats.
struct ScalarPoint {
  double gamma = 0.0;
  double info = 0.0;
  double gap = 0.0;  // entropy - info (finite alphabets only)
  double mmse = 0.0;
  double dmmse = 0.0;
};

// Anything that can be pushed through the scalar complex Gaussian channel.
class InputModel {
 public:
  virtual ~InputModel() = default;
  virtual std::string name() const = 0;
  virtual ScalarPoint evaluate(double gamma) const = 0;
  virtual double info(double gamma) const { return evaluate(gamma).info; }
  // +inf for continuous inputs.
  virtual double entropy_nats() const = 0;
};

class GaussianInput : public InputModel {
 public:
  std::string name() const override { return "Gaussian"; }
  ScalarPoint evaluate(double gamma) const override {
    ScalarPoint p;
    p.gamma = gamma;
    p.info = std::log1p(gamma);
    p.gap = INFINITY;
    p.mmse = 1.0 / (1.0 + gamma);
    p.dmmse = -p.mmse * p.mmse;
    return p;
  }
  double info(double gamma) const override { return std::log1p(gamma); }
  double entropy_nats() const override { return INFINITY; }
};

}  // namespace isirate
