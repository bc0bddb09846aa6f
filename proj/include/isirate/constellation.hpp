#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace isirate {

using cplx = std::complex<double>;

enum class Family { BPSK, QPSK, PSK, PAM, SQUARE_QAM, CROSS_QAM };

// A real alphabet with probabilities, levels sorted ascending.
struct RealAlphabet {
  std::vector<double> levels;
  std::vector<double> probs;

  double min_spacing() const;
  double entropy_nats() const;
};

struct Constellation {
  std::string name;
  std::vector<cplx> points;
  std::vector<double> probs;
  bool is_separable = false;
  // Set when is_separable: points are re x im with product probabilities.
  RealAlphabet re;
  RealAlphabet im;

  std::size_t size() const { return points.size(); }
};

Constellation make_standard(Family family, int order);

// Parses names such as "BPSK", "QPSK", "8-PSK", "4-PAM", "256-QAM", "32-QAM".
Constellation make_named(const std::string& name);

// Normalizes to zero mean and unit power, validates and detects product structure.
// Zero-probability points are dropped.
Constellation make_custom(const std::string& name, const std::vector<cplx>& points,
                          std::vector<double> probs = {});

double min_distance(const Constellation& c);
double entropy_nats(const Constellation& c);
double entropy_bits(const Constellation& c);

Constellation load_constellation_json(const std::string& path);
Constellation constellation_from_json_text(const std::string& text);

}  // namespace isirate
