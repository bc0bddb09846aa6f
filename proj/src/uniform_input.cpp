#include "isirate/uniform_input.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isirate/quadrature.hpp"
#include "isirate/special.hpp"

namespace isirate {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kHalfWidth = 0.5 * kUniformWidth;
constexpr double kFormSwitch = 0.5;
constexpr double kTableStep = 0.01;
constexpr double kTableEnd = 50.0;

double npdf(double u) { return kInvSqrt2Pi * exp_neg_half_sq(u); }

// Posterior of one component given y: normal N(y, s^2) truncated to
// [-a, a]. z is P(noise lands the input interval around y), m the mean
// offset (y - E[x|y]) / s, var the posterior variance.
struct Truncated {
  double z = 0.0;
  double m = 0.0;
  double var = 0.0;
};

Truncated truncated_direct(double y, double s) {
  // Interval short relative to s: Gauss-Legendre over the input.
  static const GaussRule gl = gauss_legendre(64);
  const double a = kHalfWidth;
  double mx = -INFINITY;
  std::vector<double> e(gl.nodes.size());
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double x = a * gl.nodes[i];
    const double t = (y - x) / s;
    e[i] = -0.5 * t * t;
    mx = std::max(mx, e[i]);
  }
  double w = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    e[i] = gl.weights[i] * std::exp(e[i] - mx);
    w += e[i];
    mu += e[i] * a * gl.nodes[i];
  }
  mu /= w;
  double var = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double dx = a * gl.nodes[i] - mu;
    var += e[i] * dx * dx;
  }
  Truncated t;
  t.z = a * w * std::exp(mx) * kInvSqrt2Pi / s;
  t.m = (y - mu) / s;
  t.var = var / w;
  return t;
}

Truncated truncated(double y, double s) {
  y = std::fabs(y);
  if (2.0 * kHalfWidth / s < 0.1) return truncated_direct(y, s);
  const double u1 = (y - kHalfWidth) / s;
  const double u2 = (y + kHalfWidth) / s;
  Truncated t;
  double tail;  // (u1 phi(u1) - u2 phi(u2)) / z
  if (u1 >= 0.0) {
    const double delta = 0.5 * (u2 - u1) * (u2 + u1);
    const double q1 = q_scaled(u1);
    const double ratio = q_scaled(u2) / q1 * std::exp(-delta);
    const double r1 = kInvSqrt2Pi / q1;
    const double den = 1.0 - ratio;
    t.z = q1 * exp_neg_half_sq(u1) * den;
    t.m = r1 * -std::expm1(-delta) / den;
    tail = r1 * (u1 - u2 * std::exp(-delta)) / den;
  } else {
    t.z = 1.0 - q_function(u2) - q_function(-u1);
    const double p1 = npdf(u1), p2 = npdf(u2);
    t.m = (p1 - p2) / t.z;
    tail = (u1 * p1 - u2 * p2) / t.z;
  }
  t.var = s * s * std::max(0.0, 1.0 + tail - t.m * t.m);
  return t;
}

// 2 * int_0^inf f(y) dy by composite Gauss-Legendre, graded around the
// interval edge where the integrand changes on the noise scale s.
double integrate_y(const std::function<double(double)>& f, double s) {
  static const GaussRule gl = gauss_legendre(16);
  const double a = kHalfWidth;
  double total = 0.0;
  auto panels = [&](double lo, double hi, int n) {
    if (!(hi > lo)) return;
    const double h = (hi - lo) / n;
    for (int p = 0; p < n; ++p) {
      const double c = lo + (p + 0.5) * h;
      double v = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) v += gl.weights[i] * f(c + 0.5 * h * gl.nodes[i]);
      total += 0.5 * h * v;
    }
  };
  const double inner = std::max(0.0, a - 8.0 * s);
  panels(0.0, inner, std::clamp(static_cast<int>(std::ceil(inner / s)), 1, 4));
  panels(inner, a + 8.0 * s, std::max(1, static_cast<int>(std::ceil((a + 8.0 * s - inner) / s))));
  panels(a + 8.0 * s, a + 40.0 * s, 8);
  return 2.0 * total;
}

double sigma(double gamma) { return std::sqrt(0.5 / gamma); }

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be finite and >= 0");
}

struct InfoTable {
  std::vector<double> zeta, ilog, dilog, ddilog;
};

double dilog_at(double zeta) {
  const double g = std::expm1(zeta);
  return (1.0 + g) * uniform_mmse(g);
}

const InfoTable& info_table() {
  static InfoTable table;
  static std::once_flag once;
  std::call_once(once, [] {
    const int n = static_cast<int>(std::round(kTableEnd / kTableStep)) + 1;
    std::vector<double> d(n), dd(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
      const double z = i * kTableStep;
      const double g = std::expm1(z);
      const double g1 = 1.0 + g;
      const double m = uniform_mmse(g);
      d[i] = g1 * m;
      dd[i] = g1 * (m + g1 * uniform_dmmse(g));
    }
    table.zeta.resize(n);
    table.ilog.assign(n, 0.0);
    table.dilog = d;
    table.ddilog = dd;
    for (int i = 0; i < n; ++i) table.zeta[i] = i * kTableStep;
    const double h = kTableStep;
    for (int i = 1; i < n; ++i)
      table.ilog[i] = table.ilog[i - 1] + 0.5 * h * (d[i - 1] + d[i]) + h * h / 12.0 * (dd[i - 1] - dd[i]);
  });
  return table;
}

}  // namespace

double uniform_component_mmse_gform(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("g-form needs gamma > 0");
  const double s = sigma(gamma);
  auto g = [&](double y) {
    Truncated t = truncated(y, s);
    return t.z * t.m * t.m / kUniformWidth;
  };
  return 0.5 / gamma * (1.0 - integrate_y(g, s));
}

double uniform_component_mmse_variance_form(double gamma) {
  check_gamma(gamma);
  if (gamma == 0.0) return 0.5;
  const double s = sigma(gamma);
  auto f = [&](double y) {
    Truncated t = truncated(y, s);
    return t.z * t.var / kUniformWidth;
  };
  return integrate_y(f, s);
}

double uniform_component_mmse(double gamma) {
  check_gamma(gamma);
  return gamma < kFormSwitch ? uniform_component_mmse_variance_form(gamma) : uniform_component_mmse_gform(gamma);
}

double uniform_component_phi2(double gamma) {
  check_gamma(gamma);
  if (gamma == 0.0) return 0.25;
  const double s = sigma(gamma);
  auto f = [&](double y) {
    Truncated t = truncated(y, s);
    return t.z * t.var * t.var / kUniformWidth;
  };
  return integrate_y(f, s);
}

double uniform_mmse(double gamma) { return 2.0 * uniform_component_mmse(gamma); }

double uniform_dmmse(double gamma) { return -4.0 * uniform_component_phi2(gamma); }

double uniform_info(double gamma) {
  check_gamma(gamma);
  if (gamma == 0.0) return 0.0;
  const double zeta = std::log1p(gamma);
  if (zeta > kTableEnd) throw std::invalid_argument("uniform_info: gamma beyond the tabulated range");
  const InfoTable& t = info_table();
  const int k = std::min(static_cast<int>(zeta / kTableStep), static_cast<int>(t.zeta.size()) - 2);
  // Quintic Hermite interpolation from values and two derivatives.
  const double h = kTableStep;
  const double x = (zeta - t.zeta[k]) / h;
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
  const double h0 = 1.0 - 10.0 * x3 + 15.0 * x4 - 6.0 * x5;
  const double h1 = x - 6.0 * x3 + 8.0 * x4 - 3.0 * x5;
  const double h2 = 0.5 * (x2 - 3.0 * x3 + 3.0 * x4 - x5);
  const double h3 = 0.5 * (x3 - 2.0 * x4 + x5);
  const double h4 = -4.0 * x3 + 7.0 * x4 - 3.0 * x5;
  const double h5 = 10.0 * x3 - 15.0 * x4 + 6.0 * x5;
  return h0 * t.ilog[k] + h1 * h * t.dilog[k] + h2 * h * h * t.ddilog[k] + h3 * h * h * t.ddilog[k + 1] +
         h4 * h * t.dilog[k + 1] + h5 * t.ilog[k + 1];
}

double shaping_offset() { return std::log(kPi * std::exp(1.0) / 6.0); }

ScalarPoint UniformInput::evaluate(double gamma) const {
  ScalarPoint p;
  p.gamma = gamma;
  p.info = uniform_info(gamma);
  p.gap = INFINITY;
  p.mmse = uniform_mmse(gamma);
  p.dmmse = uniform_dmmse(gamma);
  return p;
}

McEstimate mc_uniform_mmse(double gamma, std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 10000) throw std::invalid_argument("mc_uniform_mmse needs at least 1e4 samples");
  if (!(gamma > 0.0)) throw std::invalid_argument("mc_uniform_mmse needs gamma > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-kHalfWidth, kHalfWidth);
  std::normal_distribution<double> nz(0.0, std::sqrt(0.5));
  const double s = sigma(gamma);
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    double err2 = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double x = ux(rng);
      const double y = x + nz(rng) / std::sqrt(gamma);
      Truncated t = truncated(y, s);
      // E[x|y] = y - s m for y >= 0, mirrored otherwise.
      const double est = y >= 0.0 ? y - s * t.m : y + s * t.m;
      err2 += (x - est) * (x - est);
    }
    const double d = err2 - mean;
    mean += d / (i + 1);
    m2 += d * (err2 - mean);
  }
  McEstimate e;
  e.estimate = mean;
  e.std_error = std::sqrt(m2 / (n_samples - 1) / n_samples);
  return e;
}

LogSnrProfile build_uniform_profile(double zeta_end, double resolution_bits) {
  if (!(zeta_end > 0.0) || zeta_end > kTableEnd) throw std::invalid_argument("uniform profile: bad zeta_end");
  if (!(resolution_bits > 0.0)) throw std::invalid_argument("profile resolution must be > 0");
  const double h0 = resolution_bits * std::log(2.0);
  const int n = static_cast<int>(std::ceil(zeta_end / h0 - 1e-9)) + 1;
  LogSnrProfile p;
  p.input_name = "inf-QAM";
  p.entropy_nats = INFINITY;
  p.resolution_bits = resolution_bits;
  p.zeta_grid.resize(n);
  p.dilog.resize(n);
  p.ddilog.resize(n);
  p.ilog.assign(n, 0.0);
  p.gap.assign(n, INFINITY);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    const double z = std::min(zeta_end, i * h0);
    const double g = std::expm1(z);
    const double g1 = 1.0 + g;
    const double m = uniform_mmse(g);
    p.zeta_grid[i] = z;
    p.dilog[i] = g1 * m;
    p.ddilog[i] = g1 * (m + g1 * uniform_dmmse(g));
  }
  for (int i = 1; i < n; ++i) {
    const double h = p.zeta_grid[i] - p.zeta_grid[i - 1];
    p.ilog[i] = p.ilog[i - 1] + 0.5 * h * (p.dilog[i - 1] + p.dilog[i]) + h * h / 12.0 * (p.ddilog[i - 1] - p.ddilog[i]);
  }
  p.zeta_max = p.zeta_grid.back();
  return p;
}

namespace {

double ddilog_at(double zeta) {
  const double g = std::expm1(zeta);
  const double g1 = 1.0 + g;
  return g1 * (uniform_mmse(g) + g1 * uniform_dmmse(g));
}

double ilog_at(double zeta) { return uniform_info(std::expm1(zeta)); }

template <class F>
double bisect(F f, double lo, double hi, double tol) {
  const bool lo_neg = f(lo) < 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == lo_neg) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

template <class F>
double golden_max(F f, double a, double b, double tol, double* best) {
  const double r = 0.61803398874989484820;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  *best = std::max(fc, fd);
  return fc > fd ? c : d;
}

}  // namespace

double uniform_zeta0_low() {
  static const double z0 = bisect(ddilog_at, 0.5, 6.0, 1e-10);
  return z0;
}

UniformStructure uniform_structure(double zeta_end, double resolution_bits) {
  UniformStructure u;
  u.shaping_offset = shaping_offset();
  u.profile = build_uniform_profile(zeta_end, resolution_bits);
  UniformInput model;
  u.thresholds = concavity_thresholds(u.profile, model);
  u.zeta0_low = uniform_zeta0_low();
  // zeta I'(zeta) = I(zeta) on the convex side.
  u.zeta2_tilde = bisect([](double z) { return z * dilog_at(z) - ilog_at(z); }, u.zeta0_low, zeta_end, 1e-10);
  u.tilde_slope = dilog_at(u.zeta2_tilde);
  const double s = u.tilde_slope;
  u.zeta_m_tilde = golden_max([&](double z) { return ilog_at(z) - s * z; }, 0.0, u.zeta0_low, 1e-9,
                              &u.delta_tilde_nats);
  for (std::size_t i = 0; i < u.profile.zeta_grid.size(); ++i) {
    const double z = u.profile.zeta_grid[i];
    if (z > u.zeta2_tilde) break;
    u.grid_convex_gap = std::max(u.grid_convex_gap, u.profile.ilog[i] - s * z);
  }
  return u;
}

DeltaBar deltabar(double gamma_bar) {
  if (!(gamma_bar > 0.0)) throw std::invalid_argument("deltabar needs gamma_bar > 0");
  DeltaBar out;
  out.gamma_bar = gamma_bar;
  const double zb = std::log1p(gamma_bar);
  const double z0 = uniform_zeta0_low();
  if (zb <= z0) {
    out.zeta1_low = zb;
    out.zeta_m = zb;
    out.slope = dilog_at(zb);
    return out;
  }
  const double ib = ilog_at(zb);
  // Tangent at zeta1 passing through (zb, I(zb)).
  out.zeta1_low = bisect([&](double z) { return ilog_at(z) + (zb - z) * dilog_at(z) - ib; }, 0.0, z0, 1e-11);
  out.slope = dilog_at(out.zeta1_low);
  const double i1 = ilog_at(out.zeta1_low);
  double best = 0.0;
  out.zeta_m = golden_max([&](double z) { return i1 + out.slope * (z - out.zeta1_low) - ilog_at(z); }, z0, zb,
                          1e-9, &best);
  out.value_nats = std::max(0.0, best);
  return out;
}

std::vector<DeltaBar> deltabar_curve(const std::vector<double>& gamma_db) {
  uniform_zeta0_low();
  info_table();
  std::vector<DeltaBar> out(gamma_db.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < static_cast<int>(gamma_db.size()); ++i) out[i] = deltabar(std::pow(10.0, gamma_db[i] / 10.0));
  return out;
}

double convexity_condition(const ConvexityCertificate& c, double k, double gamma) {
  return c.c0 / (kPi * kUniformWidth * gamma * std::sqrt(gamma)) - 0.5 / (gamma * gamma) -
         k * std::exp(-0.5 * kUniformWidth * kUniformWidth * gamma);
}

ConvexityCertificate convexity_certificate(double gamma_lo, double gamma_hi, double alt_k) {
  if (!(gamma_lo > 1.0) || !(gamma_hi > gamma_lo)) throw std::invalid_argument("certificate range must lie in (1, inf)");
  using boost::math::quadrature::gauss_kronrod;
  ConvexityCertificate c;
  double err = 0.0;
  auto quad = [&](const std::function<double(double)>& f) {
    double e = 0.0;
    double v = gauss_kronrod<double, 61>::integrate(f, 0.0, 20.0, 20, 1e-14, &e);
    err = std::max(err, e);
    return v;
  };
  const double sq2 = std::sqrt(2.0);
  // e^{-2x^2} / Q(sqrt(2) x) = e^{-x^2} / q_scaled(sqrt(2) x)
  c.c1 = quad([&](double x) { return x * x * std::exp(-x * x) / q_scaled(sq2 * x); });
  c.c2 = quad([&](double x) {
    const double q = q_scaled(sq2 * x);
    return x * std::exp(-x * x) / (q * q);
  });
  auto kint = [&](int i) {
    return quad([&](double x) {
      const double den = q_diff(sq2 * (x - kHalfWidth), sq2 * (x + kHalfWidth));
      const double num = std::pow(x, i) * std::exp(-2.0 * x * x);
      return num == 0.0 ? 0.0 : num / den;
    });
  };
  c.k0 = kint(0);
  c.k2 = kint(2);
  c.c0 = c.c1 - c.c2 / (4.0 * std::sqrt(kPi));
  c.k = kUniformWidth / kPi * c.k0 + 4.0 / (kPi * kUniformWidth) * c.k2;
  c.alt_k = alt_k;
  c.max_quadrature_error = err;
  auto threshold = [&](double k) -> double {
    const int n = 4000;
    const double r = std::log(gamma_hi / gamma_lo);
    int last_bad = -1;
    for (int i = 0; i <= n; ++i)
      if (convexity_condition(c, k, gamma_lo * std::exp(r * i / n)) < 0.0) last_bad = i;
    if (last_bad == n) return NAN;
    if (last_bad < 0) return gamma_lo;
    const double lo = gamma_lo * std::exp(r * last_bad / n);
    const double hi = gamma_lo * std::exp(r * (last_bad + 1) / n);
    return bisect([&](double g) { return convexity_condition(c, k, g); }, lo, hi, 1e-10 * hi);
  };
  c.threshold_gamma = threshold(c.k);
  c.threshold_gamma_alt_k = threshold(alt_k);
  return c;
}

}  // namespace isirate
