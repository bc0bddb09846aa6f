#include "isirate/constellation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace isirate {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int int_sqrt(int n) {
  int r = static_cast<int>(std::lround(std::sqrt(double(n))));
  return r * r == n ? r : -1;
}

// Groups nearly equal values; returns the sorted distinct values and, for each
// input, the index of its group.
std::vector<double> cluster(const std::vector<double>& v, std::vector<int>& index, double tol) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> groups;
  index.assign(v.size(), -1);
  for (int i : order) {
    if (groups.empty() || v[i] - groups.back() > tol) groups.push_back(v[i]);
    index[i] = static_cast<int>(groups.size()) - 1;
  }
  return groups;
}

void detect_product(Constellation& c) {
  c.is_separable = false;
  const std::size_t m = c.size();
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = c.points[i].real();
    ys[i] = c.points[i].imag();
  }
  std::vector<int> ix, iy;
  auto gx = cluster(xs, ix, 1e-10);
  auto gy = cluster(ys, iy, 1e-10);
  if (gx.size() * gy.size() != m) return;
  std::vector<double> px(gx.size(), 0.0), py(gy.size(), 0.0);
  std::vector<int> seen(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    px[ix[i]] += c.probs[i];
    py[iy[i]] += c.probs[i];
    int cell = ix[i] * static_cast<int>(gy.size()) + iy[i];
    if (seen[cell]++) return;
  }
  for (std::size_t i = 0; i < m; ++i)
    if (std::fabs(px[ix[i]] * py[iy[i]] - c.probs[i]) > 1e-12) return;
  c.re = RealAlphabet{gx, px};
  c.im = RealAlphabet{gy, py};
  c.is_separable = true;
}

std::vector<cplx> pam_levels(int m) {
  std::vector<cplx> pts;
  for (int i = 0; i < m; ++i) pts.emplace_back(2.0 * i - (m - 1), 0.0);
  return pts;
}

std::vector<cplx> square_grid(int side) {
  std::vector<cplx> pts;
  for (int i = 0; i < side; ++i)
    for (int k = 0; k < side; ++k) pts.emplace_back(2.0 * i - (side - 1), 2.0 * k - (side - 1));
  return pts;
}

std::vector<cplx> cross_grid(int order) {
  // 2^(2n+1) points: a (3*2^(n-1))^2 grid with a 2^(n-1) square cut from each corner.
  int n = 0;
  while ((1 << (2 * n + 1)) < order) ++n;
  int side = 3 << (n - 1);
  int cut = 1 << (n - 1);
  std::vector<cplx> pts;
  for (int i = 0; i < side; ++i)
    for (int k = 0; k < side; ++k) {
      bool ci = i < cut || i >= side - cut;
      bool ck = k < cut || k >= side - cut;
      if (ci && ck) continue;
      pts.emplace_back(2.0 * i - (side - 1), 2.0 * k - (side - 1));
    }
  return pts;
}

}  // namespace

double RealAlphabet::min_spacing() const {
  double d = INFINITY;
  for (std::size_t i = 1; i < levels.size(); ++i) d = std::min(d, levels[i] - levels[i - 1]);
  return d;
}

double RealAlphabet::entropy_nats() const {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

Constellation make_custom(const std::string& name, const std::vector<cplx>& points,
                          std::vector<double> probs) {
  if (points.empty()) throw std::invalid_argument("constellation '" + name + "' has no points");
  if (probs.empty()) probs.assign(points.size(), 1.0);
  if (probs.size() != points.size())
    throw std::invalid_argument("constellation '" + name + "': probs and points differ in length");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("constellation '" + name + "': probabilities must be finite and >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("constellation '" + name + "': probabilities sum to zero");

  Constellation c;
  c.name = name;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].real()) || !std::isfinite(points[i].imag()))
      throw std::invalid_argument("constellation '" + name + "': non-finite point");
    if (probs[i] > 0.0) {
      c.points.push_back(points[i]);
      c.probs.push_back(probs[i] / total);
    }
  }
  cplx mean = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) mean += c.probs[i] * c.points[i];
  double power = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) power += c.probs[i] * std::norm(c.points[i] - mean);
  if (!(power > 0.0)) throw std::invalid_argument("constellation '" + name + "' has zero power after centering");
  double scale = 1.0 / std::sqrt(power);
  for (auto& p : c.points) p = (p - mean) * scale;
  if (!(min_distance(c) > 1e-9))
    throw std::invalid_argument("constellation '" + name + "' has coincident points");
  detect_product(c);
  return c;
}

Constellation make_standard(Family family, int order) {
  switch (family) {
    case Family::BPSK:
      if (order != 2) throw std::invalid_argument("BPSK requires order 2");
      return make_custom("BPSK", pam_levels(2));
    case Family::QPSK:
      if (order != 4) throw std::invalid_argument("QPSK requires order 4");
      return make_custom("QPSK", square_grid(2));
    case Family::PSK: {
      if (order < 2 || !is_power_of_two(order))
        throw std::invalid_argument("PSK order must be a power of 2 (>= 2)");
      std::vector<cplx> pts;
      for (int k = 0; k < order; ++k) pts.push_back(std::polar(1.0, 2.0 * kPi * k / order));
      return make_custom(std::to_string(order) + "-PSK", pts);
    }
    case Family::PAM:
      if (order < 2) throw std::invalid_argument("PAM order must be >= 2");
      return make_custom(std::to_string(order) + "-PAM", pam_levels(order));
    case Family::SQUARE_QAM: {
      int side = int_sqrt(order);
      if (order < 4 || side < 2)
        throw std::invalid_argument("SQUARE_QAM order must be a perfect square >= 4");
      return make_custom(std::to_string(order) + "-QAM", square_grid(side));
    }
    case Family::CROSS_QAM: {
      bool ok = order >= 32 && is_power_of_two(order);
      if (ok) {
        int bits = 0;
        while ((1 << bits) < order) ++bits;
        ok = bits % 2 == 1;
      }
      if (!ok) throw std::invalid_argument("CROSS_QAM order must be an odd power of 2 (>= 32)");
      return make_custom(std::to_string(order) + "-QAM", cross_grid(order));
    }
  }
  throw std::invalid_argument("unknown constellation family");
}

Constellation make_named(const std::string& raw) {
  std::string name;
  for (char ch : raw) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (name == "BPSK") return make_standard(Family::BPSK, 2);
  if (name == "QPSK") return make_standard(Family::QPSK, 4);
  auto dash = name.find('-');
  if (dash == std::string::npos || dash == 0)
    throw std::invalid_argument("unknown constellation name '" + raw + "'");
  int order = 0;
  try {
    std::size_t used = 0;
    order = std::stoi(name.substr(0, dash), &used);
    if (used != dash) throw std::invalid_argument("");
  } catch (...) {
    throw std::invalid_argument("unknown constellation name '" + raw + "'");
  }
  std::string fam = name.substr(dash + 1);
  if (fam == "PSK") return make_standard(Family::PSK, order);
  if (fam == "PAM") return make_standard(Family::PAM, order);
  if (fam == "QAM") {
    if (int_sqrt(order) > 0) return make_standard(Family::SQUARE_QAM, order);
    return make_standard(Family::CROSS_QAM, order);
  }
  throw std::invalid_argument("unknown constellation name '" + raw + "'");
}

double min_distance(const Constellation& c) {
  double best = INFINITY;
  const std::size_t m = c.size();
  if (m < 2) return best;
  // Sort by real part and sweep; O(M log M) in practice for lattice-like sets.
  std::vector<cplx> pts = c.points;
  std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = i + 1; k < m; ++k) {
      if (pts[k].real() - pts[i].real() >= best) break;
      best = std::min(best, std::abs(pts[k] - pts[i]));
    }
  return best;
}

double entropy_nats(const Constellation& c) {
  double h = 0.0;
  for (double p : c.probs) h -= p * std::log(p);
  return h;
}

double entropy_bits(const Constellation& c) { return entropy_nats(c) / std::log(2.0); }

Constellation constellation_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("constellation JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("points") || !j["points"].is_array())
    throw std::invalid_argument("constellation JSON needs a 'points' array");
  std::vector<cplx> pts;
  for (const auto& p : j["points"]) {
    if (!p.is_array() || p.size() != 2) throw std::invalid_argument("each point must be [re, im]");
    pts.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  std::vector<double> probs;
  if (j.contains("probs")) probs = j["probs"].get<std::vector<double>>();
  std::string name = j.value("name", std::string("custom"));
  return make_custom(name, pts, probs);
}

Constellation load_constellation_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constellation file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return constellation_from_json_text(ss.str());
}

}  // namespace isirate
