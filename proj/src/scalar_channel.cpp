#include "isirate/scalar_channel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "isirate/io.hpp"
#include "isirate/quadrature.hpp"

namespace isirate {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Above this value of gamma*(d/2)^2 the Hermite rule no longer resolves the
// posterior transitions and the panel rule takes over.
constexpr double kHermiteRhoLimit = 0.5;
constexpr int kPanelNodes = 8;

void check_order(int order) {
  if (order < 8) throw std::invalid_argument("quad_order must be >= 8");
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || std::isnan(gamma)) throw std::invalid_argument("gamma must be >= 0");
}

struct Feature {
  double center;
  double width;
};

// Panel rule in t for symbol k: Legendre panels refined around every point
// where the dominant posterior term switches.
GaussRule panel_rule(const RealAlphabet& a, const std::vector<double>& logp, int k, double sg) {
  const int n = static_cast<int>(a.levels.size());
  std::vector<Feature> feats;
  double left = kNegInf, right = INFINITY;
  double wl = 0.0, wr = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    double di = a.levels[i + 1] - a.levels[i];
    double del0 = sg * (a.levels[k] - a.levels[i]);
    double del1 = sg * (a.levels[k] - a.levels[i + 1]);
    double c = ((logp[i + 1] - logp[i]) / (del1 - del0) - del0 - del1) / 2.0;
    double w = 1.0 / (2.0 * sg * di);
    if (c < 0.0 && c > left) { left = c; wl = w; }
    if (c >= 0.0 && c < right) { right = c; wr = w; }
    feats.push_back({c, w});
  }
  double lo = -9.0, hi = 9.0;
  if (std::isfinite(left) && left < lo) lo = std::max(-38.0, left - 16.0 * wl);
  if (std::isfinite(right) && right > hi) hi = std::min(38.0, right + 16.0 * wr);
  std::vector<Feature> active;
  for (const auto& f : feats)
    if (f.center > lo - 20.0 * f.width && f.center < hi + 20.0 * f.width) active.push_back(f);

  auto step = [&](double t) {
    double h = 0.5;
    for (const auto& f : active) {
      double dist = std::fabs(t - f.center) - 12.0 * f.width;
      h = std::min(h, 1.5 * f.width + 0.5 * std::max(0.0, dist));
    }
    return h;
  };
  GaussRule rule;
  double t = lo;
  while (t < hi) {
    double h = step(t);
    h = std::min(h, step(t + h));
    h = std::min(h, step(t + h));
    if (t + h > hi || hi - (t + h) < 1e-3 * h) h = hi - t;
    append_gaussian_panel(rule, t, t + h, kPanelNodes);
    t += h;
  }
  return rule;
}

bool same_alphabet(const RealAlphabet& x, const RealAlphabet& y) {
  if (x.levels.size() != y.levels.size()) return false;
  for (std::size_t i = 0; i < x.levels.size(); ++i)
    if (std::fabs(x.levels[i] - y.levels[i]) > 1e-14 || std::fabs(x.probs[i] - y.probs[i]) > 1e-15)
      return false;
  return true;
}

// Index of the point nearest to z within tol, or -1. pts sorted by real part.
int find_point(const std::vector<std::pair<cplx, int>>& sorted, cplx z, double tol) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), z.real() - tol,
                             [](const std::pair<cplx, int>& p, double v) { return p.first.real() < v; });
  for (; it != sorted.end() && it->first.real() <= z.real() + tol; ++it)
    if (std::abs(it->first - z) <= tol) return it->second;
  return -1;
}

}  // namespace

const char* to_string(QuadMethod m) {
  return m == QuadMethod::HERMITE_2D ? "HERMITE_2D" : "SEPARABLE_1D";
}

// ---------------------------------------------------------------------------
// Real component kernel

RealKernel::RealKernel(RealAlphabet alphabet, int order) : alpha_(std::move(alphabet)), order_(order) {
  check_order(order);
  const int n = static_cast<int>(alpha_.levels.size());
  double pmax = 0.0, pmin = 1.0;
  for (double p : alpha_.probs) {
    logp_.push_back(std::log(p));
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
  }
  prune_ = 50.0 + std::log(pmax / pmin);

  bool symmetric = true;
  for (int i = 0; i < n; ++i) {
    int j = n - 1 - i;
    if (std::fabs(alpha_.levels[i] + alpha_.levels[j]) > 1e-12 ||
        std::fabs(alpha_.probs[i] - alpha_.probs[j]) > 1e-15)
      symmetric = false;
  }
  for (int i = 0; i < n; ++i) {
    int j = n - 1 - i;
    if (symmetric && j < i) break;
    double w = alpha_.probs[i];
    if (symmetric && j != i) w += alpha_.probs[j];
    orbits_.push_back({i, w});
  }
}

void RealKernel::symbol_terms(int k, double gamma, ComponentStats& out) const {
  const auto& a = alpha_.levels;
  const int n = static_cast<int>(a.size());
  const double sg = std::sqrt(gamma);
  const double d = alpha_.min_spacing();
  const double rho = gamma * 0.25 * d * d;
  const GaussRule& gh = gauss_hermite(order_);
  GaussRule local;
  const GaussRule* rule = &gh;
  if (rho > 0.15) {
    local = panel_rule(alpha_, logp_, k, sg);
    rule = &local;
  }
  std::vector<double> e(n), v(n);
  double gap_sum = 0.0, phi_sum = 0.0, phi2_sum = 0.0;
  const std::size_t nodes = rule->nodes.size();
  for (std::size_t q = 0; q < nodes; ++q) {
    const double t = rule->nodes[q];
    const double wq = rule->weights[q];
    if (wq == 0.0) continue;
    int lo = 0, hi = n - 1, j = k;
    if (sg > 0.0) {
      double y = a[k] + t / sg;
      j = static_cast<int>(std::lower_bound(a.begin(), a.end(), y) - a.begin());
      if (j == n || (j > 0 && y - a[j - 1] < a[j] - y)) --j;
      double r2 = (a[j] - y) * (a[j] - y) + prune_ / gamma;
      lo = j;
      hi = j;
      while (lo > 0 && (a[lo - 1] - y) * (a[lo - 1] - y) <= r2) --lo;
      while (hi < n - 1 && (a[hi + 1] - y) * (a[hi + 1] - y) <= r2) ++hi;
    }
    double mx = kNegInf;
    for (int m = lo; m <= hi; ++m) {
      double z = t + sg * (a[k] - a[m]);
      e[m] = logp_[m] - z * z;
      mx = std::max(mx, e[m]);
    }
    double s_other = 0.0, s_k = 0.0, mu = 0.0;
    for (int m = lo; m <= hi; ++m) {
      double vm = std::exp(e[m] - mx);
      v[m] = vm;
      if (m == k) s_k = vm;
      else s_other += vm;
      mu += vm * (a[m] - a[j]);
    }
    const double s = s_other + s_k;
    mu /= s;
    double phi = 0.0;
    for (int m = lo; m <= hi; ++m) {
      double dm = a[m] - a[j] - mu;
      phi += v[m] * dm * dm;
    }
    phi /= s;
    const double ek = logp_[k] - t * t;
    double gap = (ek >= mx) ? std::log1p(s_other) : (mx - ek + std::log(s));
    gap_sum += wq * gap;
    phi_sum += wq * phi;
    phi2_sum += wq * phi * phi;
  }
  out.gap = gap_sum;
  out.mmse = phi_sum;
  out.phi2 = phi2_sum;
}

ComponentStats RealKernel::evaluate(double gamma) const {
  check_gamma(gamma);
  ComponentStats total;
  if (alpha_.levels.size() < 2) return total;
  if (std::isinf(gamma)) {
    total.gap = 0.0;
    return total;
  }
  for (const auto& o : orbits_) {
    ComponentStats s;
    symbol_terms(o.rep, gamma, s);
    total.gap += o.weight * s.gap;
    total.mmse += o.weight * s.mmse;
    total.phi2 += o.weight * s.phi2;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Scalar channel

ScalarChannel::ScalarChannel(Constellation c, QuadConfig cfg) : c_(std::move(c)), cfg_(cfg) {
  check_order(cfg_.order);
  entropy_ = isirate::entropy_nats(c_);
  dmin_ = min_distance(c_);
  method_ = (c_.is_separable && !cfg_.force_2d) ? QuadMethod::SEPARABLE_1D : QuadMethod::HERMITE_2D;
  for (double p : c_.probs) logp_.push_back(std::log(p));

  if (method_ == QuadMethod::SEPARABLE_1D) {
    kernels_.emplace_back(c_.re, cfg_.order);
    if (c_.im.levels.size() > 1) {
      same_components_ = same_alphabet(c_.re, c_.im);
      if (!same_components_) kernels_.emplace_back(c_.im, cfg_.order);
    }
    return;
  }

  // Symmetry group: rotations by multiples of 2*pi/K and reflections
  // (conjugation followed by a rotation) that preserve points and probs.
  const int m = static_cast<int>(c_.size());
  std::vector<std::pair<cplx, int>> sorted;
  for (int i = 0; i < m; ++i) sorted.push_back({c_.points[i], i});
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& x, const auto& y) { return x.first.real() < y.first.real(); });
  const double tol = 1e-9;
  auto preserved = [&](auto transform) {
    for (int i = 0; i < m; ++i) {
      int j = find_point(sorted, transform(c_.points[i]), tol);
      if (j < 0 || std::fabs(c_.probs[j] - c_.probs[i]) > 1e-14) return false;
    }
    return true;
  };
  const double two_pi = 2.0 * 3.14159265358979323846;
  int kmax = 1;
  for (int k = 2; k <= std::min(m, 64); ++k) {
    cplx r = std::polar(1.0, two_pi / k);
    if (preserved([&](cplx z) { return z * r; })) kmax = k;
  }
  std::vector<std::function<cplx(cplx)>> group;
  for (int j = 0; j < kmax; ++j) {
    cplx r = std::polar(1.0, two_pi * j / kmax);
    group.push_back([r](cplx z) { return z * r; });
    if (preserved([&](cplx z) { return std::conj(z) * r; }))
      group.push_back([r](cplx z) { return std::conj(z) * r; });
  }
  std::vector<char> seen(m, 0);
  for (int i = 0; i < m; ++i) {
    if (seen[i]) continue;
    double w = 0.0;
    for (const auto& g : group) {
      int j = find_point(sorted, g(c_.points[i]), tol);
      if (j >= 0 && !seen[j]) {
        seen[j] = 1;
        w += c_.probs[j];
      }
    }
    orbits_.push_back({i, w});
  }
}

std::size_t ScalarChannel::orbit_count() const {
  if (method_ == QuadMethod::HERMITE_2D) return orbits_.size();
  std::size_t n = 0;
  for (const auto& k : kernels_) n += (k.alphabet().levels.size() + 1) / 2;
  return n;
}

int ScalarChannel::order_2d(double gamma) const {
  double rho = gamma * 0.25 * dmin_ * dmin_;
  if (rho <= kHermiteRhoLimit) return cfg_.order;
  int n = static_cast<int>(std::ceil(1.6 * cfg_.order * std::sqrt(rho / kHermiteRhoLimit)));
  n = ((n + 15) / 16) * 16;
  return std::max(cfg_.order, std::min(n, cfg_.max_order_2d));
}

ScalarPoint ScalarChannel::evaluate(double gamma) const {
  check_gamma(gamma);
  if (method_ == QuadMethod::HERMITE_2D) return evaluate_2d(gamma, nullptr);
  ScalarPoint p;
  p.gamma = gamma;
  double gap = 0.0, mm = 0.0, phi2 = 0.0;
  for (const auto& k : kernels_) {
    ComponentStats s = k.evaluate(gamma);
    gap += s.gap;
    mm += s.mmse;
    phi2 += s.phi2;
  }
  if (same_components_) {
    gap *= 2.0;
    mm *= 2.0;
    phi2 *= 2.0;
  }
  p.gap = gap;
  p.info = std::max(0.0, entropy_ - gap);
  p.mmse = mm;
  p.dmmse = -2.0 * phi2;
  return p;
}

Derivative2D ScalarChannel::derivative_terms(double gamma) const {
  Derivative2D d;
  if (method_ == QuadMethod::HERMITE_2D) {
    evaluate_2d(gamma, &d);
    return d;
  }
  ScalarChannel two_d(c_, QuadConfig{cfg_.order, true, cfg_.max_order_2d});
  return two_d.derivative_terms(gamma);
}

ScalarPoint ScalarChannel::evaluate_2d(double gamma, Derivative2D* diag) const {
  const int m = static_cast<int>(c_.size());
  const double sg = std::sqrt(gamma);
  const int n = order_2d(gamma);
  const GaussRule& gh = gauss_hermite(n);
  // Tensor nodes whose weight is below 1e-32 are dropped.
  int first = 0;
  while (first < n && gh.weights[first] * gh.weights[n / 2] < 1e-32) ++first;
  const int last = n - 1 - first;
  double pmax = 0.0, pmin = 1.0;
  for (double p : c_.probs) {
    pmax = std::max(pmax, p);
    pmin = std::min(pmin, p);
  }
  const double prune = 50.0 + std::log(pmax / pmin);
  std::vector<double> v(m), d2(m);
  std::vector<int> act(m);
  double gap_t = 0.0, phi_t = 0.0, phi2_t = 0.0, psi2_t = 0.0;
  for (const auto& o : orbits_) {
    const int k = o.rep;
    double gap_s = 0.0, phi_s = 0.0, phi2_s = 0.0, psi2_s = 0.0;
    for (int a = first; a <= last; ++a) {
      for (int b = first; b <= last; ++b) {
        const double w = gh.weights[a] * gh.weights[b];
        if (w < 1e-32) continue;
        const cplx nz(gh.nodes[a], gh.nodes[b]);
        // Observation on the input scale is y = x_k + nz / sg; only points
        // within the pruning radius of y carry non-negligible posterior mass.
        double best = INFINITY;
        int mode = k;
        for (int i = 0; i < m; ++i) {
          cplx z = nz + sg * (c_.points[k] - c_.points[i]);
          d2[i] = std::norm(z);
          double score = d2[i] - logp_[i];
          if (score < best) {
            best = score;
            mode = i;
          }
        }
        const double mx = -best;
        const double cut = best + prune;
        int na = 0;
        for (int i = 0; i < m; ++i)
          if (d2[i] - logp_[i] <= cut) act[na++] = i;
        double s_other = 0.0, s_k = 0.0;
        cplx mu = 0.0;
        for (int q = 0; q < na; ++q) {
          int i = act[q];
          double vi = std::exp(logp_[i] - d2[i] - mx);
          v[i] = vi;
          if (i == k) s_k = vi;
          else s_other += vi;
          mu += vi * (c_.points[i] - c_.points[mode]);
        }
        const double s = s_other + s_k;
        mu /= s;
        double phi = 0.0;
        cplx psi = 0.0;
        for (int q = 0; q < na; ++q) {
          int i = act[q];
          cplx dv = c_.points[i] - c_.points[mode] - mu;
          phi += v[i] * std::norm(dv);
          psi += v[i] * dv * dv;
        }
        phi /= s;
        psi /= s;
        const double ek = logp_[k] - std::norm(nz);
        const double gap = (ek >= mx) ? std::log1p(s_other) : (mx - ek + std::log(s));
        gap_s += w * gap;
        phi_s += w * phi;
        phi2_s += w * phi * phi;
        psi2_s += w * std::norm(psi);
      }
    }
    gap_t += o.weight * gap_s;
    phi_t += o.weight * phi_s;
    phi2_t += o.weight * phi2_s;
    psi2_t += o.weight * psi2_s;
  }
  ScalarPoint p;
  p.gamma = gamma;
  p.gap = gap_t;
  p.info = std::max(0.0, entropy_ - gap_t);
  p.mmse = phi_t;
  p.dmmse = -(phi2_t + psi2_t);
  if (diag) {
    diag->e_phi = phi_t;
    diag->e_phi2 = phi2_t;
    diag->e_psi2 = psi2_t;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Free functions

double mmse(const Constellation& c, double gamma, int quad_order) {
  return ScalarChannel(c, QuadConfig{quad_order, false}).evaluate(gamma).mmse;
}

double mutual_info(const Constellation& c, double gamma, int quad_order) {
  return ScalarChannel(c, QuadConfig{quad_order, false}).evaluate(gamma).info;
}

double mmse_derivative_fd(const ScalarChannel& ch, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mmse_derivative requires gamma > 0");
  double h = std::max(1e-4, 1e-3 * gamma);
  if (gamma < 2.0 * h) h = 0.5 * gamma;
  auto diff = [&](double step) {
    return (ch.evaluate(gamma + step).mmse - ch.evaluate(gamma - step).mmse) / (2.0 * step);
  };
  double d1 = diff(h);
  double d2 = diff(0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

double mmse_derivative(const Constellation& c, double gamma, int quad_order) {
  if (!(gamma > 0.0)) throw std::invalid_argument("mmse_derivative requires gamma > 0");
  ScalarChannel ch(c, QuadConfig{quad_order, false});
  if (ch.method() == QuadMethod::SEPARABLE_1D) return ch.evaluate(gamma).dmmse;
  return mmse_derivative_fd(ch, gamma);
}

PointwiseStats pointwise(const Constellation& c, cplx y, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  const std::size_t m = c.size();
  std::vector<double> e(m);
  double mx = kNegInf;
  std::size_t mode = 0;
  for (std::size_t i = 0; i < m; ++i) {
    e[i] = std::log(c.probs[i]) - gamma * std::norm(y - c.points[i]);
    if (e[i] > mx) {
      mx = e[i];
      mode = i;
    }
  }
  double s = 0.0;
  cplx mu = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    e[i] = std::exp(e[i] - mx);
    s += e[i];
    mu += e[i] * (c.points[i] - c.points[mode]);
  }
  mu /= s;
  PointwiseStats out;
  for (std::size_t i = 0; i < m; ++i) {
    cplx dv = c.points[i] - c.points[mode] - mu;
    out.phi += e[i] * std::norm(dv);
    out.psi += e[i] * dv * dv;
  }
  out.phi /= s;
  out.psi /= s;
  return out;
}

double pointwise_real(const RealAlphabet& a, double y, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  const std::size_t m = a.levels.size();
  std::vector<double> e(m);
  double mx = kNegInf;
  std::size_t mode = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dy = y - a.levels[i];
    e[i] = std::log(a.probs[i]) - gamma * dy * dy;
    if (e[i] > mx) {
      mx = e[i];
      mode = i;
    }
  }
  double s = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    e[i] = std::exp(e[i] - mx);
    s += e[i];
    mu += e[i] * (a.levels[i] - a.levels[mode]);
  }
  mu /= s;
  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dv = a.levels[i] - a.levels[mode] - mu;
    var += e[i] * dv * dv;
  }
  return var / s;
}

RealAlphabet pam_alphabet(int m, double d) {
  if (m < 2) throw std::invalid_argument("PAM size must be >= 2");
  if (!(d > 0.0)) throw std::invalid_argument("PAM spacing d must be > 0");
  RealAlphabet a;
  for (int i = 0; i < m; ++i) {
    a.levels.push_back((i - 0.5 * (m - 1)) * d);
    a.probs.push_back(1.0 / m);
  }
  return a;
}

double pam_mmse(int m, double d, double gamma, int quad_order) {
  return RealKernel(pam_alphabet(m, d), quad_order).evaluate(gamma).mmse;
}

double pam_dmmse(int m, double d, double gamma, int quad_order) {
  return -2.0 * RealKernel(pam_alphabet(m, d), quad_order).evaluate(gamma).phi2;
}

McEstimate mc_oracle_mmse(const Constellation& c, double gamma, std::int64_t n_samples,
                          std::uint64_t seed) {
  if (n_samples < 10000) throw std::invalid_argument("mc_oracle_mmse needs at least 1e4 samples");
  check_gamma(gamma);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(c.probs.begin(), c.probs.end());
  std::normal_distribution<double> noise(0.0, std::sqrt(0.5));
  const double inv_sg = gamma > 0.0 ? 1.0 / std::sqrt(gamma) : 0.0;
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    int k = pick(rng);
    double nr = noise(rng), ni = noise(rng);
    double phi;
    if (gamma > 0.0) {
      cplx y = c.points[k] + cplx(nr, ni) * inv_sg;
      phi = pointwise(c, y, gamma).phi;
    } else {
      phi = 1.0;
    }
    double delta = phi - mean;
    mean += delta / double(i + 1);
    m2 += delta * (phi - mean);
  }
  McEstimate r;
  r.estimate = mean;
  r.std_error = std::sqrt(m2 / double(n_samples - 1) / double(n_samples));
  return r;
}

std::vector<double> db_grid(const GridSpec& g) {
  if (g.count < 1) throw std::invalid_argument("grid needs at least one point");
  if (g.count > 1 && !(g.db_hi > g.db_lo)) throw std::invalid_argument("grid range must be increasing");
  std::vector<double> out(g.count);
  for (int i = 0; i < g.count; ++i) {
    double db = g.count == 1 ? g.db_lo : g.db_lo + (g.db_hi - g.db_lo) * i / (g.count - 1);
    out[i] = db_to_lin(db);
  }
  return out;
}

namespace {

ScalarCurve curve_shell(const ScalarChannel& ch, const GridSpec& g) {
  ScalarCurve c;
  c.constellation_ref = ch.name();
  c.gamma_grid = db_grid(g);
  c.info_nats.resize(c.gamma_grid.size());
  c.mmse.resize(c.gamma_grid.size());
  c.dmmse.resize(c.gamma_grid.size());
  c.quad_order = ch.quad_order();
  c.method = ch.method();
  return c;
}

}  // namespace

ScalarCurve tabulate(const ScalarChannel& ch, const GridSpec& g) {
  ScalarCurve c = curve_shell(ch, g);
  const int n = static_cast<int>(c.gamma_grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    ScalarPoint p = ch.evaluate(c.gamma_grid[i]);
    c.info_nats[i] = p.info;
    c.mmse[i] = p.mmse;
    c.dmmse[i] = p.dmmse;
  }
  return c;
}

ScalarCurve tabulate_serial(const ScalarChannel& ch, const GridSpec& g) {
  ScalarCurve c = curve_shell(ch, g);
  for (std::size_t i = 0; i < c.gamma_grid.size(); ++i) {
    ScalarPoint p = ch.evaluate(c.gamma_grid[i]);
    c.info_nats[i] = p.info;
    c.mmse[i] = p.mmse;
    c.dmmse[i] = p.dmmse;
  }
  return c;
}

void write_curve_csv(const ScalarCurve& curve, const std::string& path, const std::string& config_json) {
  CsvWriter w({"gamma_db", "info_bits", "mmse", "dmmse"});
  for (std::size_t i = 0; i < curve.gamma_grid.size(); ++i)
    w.row_numbers({lin_to_db(curve.gamma_grid[i]), nats_to_bits(curve.info_nats[i]), curve.mmse[i],
                   curve.dmmse[i]});
  w.save(path);
  nlohmann::json meta;
  meta["constellation"] = curve.constellation_ref;
  meta["quad_order"] = curve.quad_order;
  meta["method"] = to_string(curve.method);
  meta["points"] = curve.gamma_grid.size();
  meta["config"] = nlohmann::json::parse(config_json);
  write_text_file(sidecar_path(path), meta.dump(2) + "\n");
}

}  // namespace isirate
