#include "isirate/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "isirate/io.hpp"
#include "isirate/scalar_channel.hpp"
#include "isirate/special.hpp"

namespace isirate {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTailTol = 1e-14;
constexpr int kMaxTerms = 10000000;

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be finite and > 0");
}

// Adds terms until the geometric tail majorant falls below kTailTol relative
// to min(1, partial sum). majorant(k) bounds term k and ratio(k) bounds
// majorant(j+1)/majorant(j) for every j >= k.
template <class Term, class Majorant, class Ratio>
SeriesValue sum_series(int first, Term term, Majorant majorant, Ratio ratio) {
  SeriesValue s;
  for (int k = first; k < first + kMaxTerms; ++k) {
    s.value += term(k);
    ++s.terms;
    const double r = ratio(k + 1);
    if (r < 1.0) {
      s.tail_bound = majorant(k + 1) / (1.0 - r);
      if (s.tail_bound <= kTailTol * std::min(1.0, s.value)) return s;
    }
  }
  throw std::runtime_error("series did not converge");
}

double gk_integral(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-15, &err);
}

// (1/sqrt(pi)) int exp(-u^2) sech^p(2 sqrt(gamma) u) du over the real line.
// Below gamma = 1 the Gaussian sets the scale; above it the sech factor does,
// so the integral is taken in z = sqrt(gamma) u.
double sech_moment(double gamma, int p) {
  const double sg = std::sqrt(gamma);
  if (gamma < 1.0) {
    auto f = [&](double u) { return std::exp(-u * u) * std::pow(1.0 / std::cosh(2.0 * sg * u), p); };
    return 2.0 / std::sqrt(kPi) * gk_integral(f, 0.0, 9.0);
  }
  const double upper = std::min(9.0 * sg, 20.0);
  auto f = [&](double z) {
    const double s = 1.0 / std::cosh(2.0 * z);
    return std::exp(-z * z / gamma) * std::pow(s, p);
  };
  return 2.0 / std::sqrt(kPi) / sg * gk_integral(f, 0.0, upper);
}

}  // namespace

SeriesValue b_up_series(double rho) {
  check_rho(rho);
  const double a = std::sqrt(8.0 * rho);
  SeriesValue s = sum_series(
      2, [&](int k) { return 4.0 * (2 * k + 1) * q_function(k * a); },
      [&](int k) { return 2.0 * (2 * k + 1) * std::exp(-4.0 * rho * k * k); },
      [&](int k) { return (2.0 * k + 3) / (2.0 * k + 1) * std::exp(-4.0 * rho * (2 * k + 1)); });
  s.value += 16.0 * q_function(a);
  ++s.terms;
  return s;
}

SeriesValue d_up_series(double rho) {
  check_rho(rho);
  auto term = [&](int k) { return 4.0 * (k + 1.0) * (k + 1.0) * std::exp(-4.0 * rho * k * k); };
  return sum_series(1, term, term, [&](int k) {
    const double q = (k + 2.0) / (k + 1.0);
    return q * q * std::exp(-4.0 * rho * (2 * k + 1));
  });
}

double b_up(double rho) { return b_up_series(rho).value; }

double b_low(double rho) {
  check_rho(rho);
  return 4.0 * q_function(std::sqrt(8.0 * rho));
}

double c_up(double rho) {
  check_rho(rho);
  return 32.0 * q_scaled(std::sqrt(32.0 * rho)) * std::exp(-8.0 * rho);
}

double c_low(double rho) {
  const double d = d_up(rho);
  return 2.0 * (2.0 * d + d * d + q_function(std::sqrt(8.0 * rho)));
}

double d_up(double rho) { return d_up_series(rho).value; }

double d_up_majorant(double rho) {
  check_rho(rho);
  const double den = -std::expm1(-4.0 * rho);
  return 16.0 * std::exp(-4.0 * rho) / (den * den * den);
}

double bpsk_mmse_closed(double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (gamma == 0.0) return 1.0;
  return std::exp(-gamma) * sech_moment(gamma, 1);
}

double bpsk_dmmse_closed(double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (gamma == 0.0) return -2.0;
  return -2.0 * std::exp(-gamma) * sech_moment(gamma, 3);
}

BpskBoundPairs bpsk_bound_pairs(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  const double e = std::exp(-gamma);
  const double a = 0.5 * std::sqrt(kPi / gamma) * e;
  BpskBoundPairs b;
  b.mmse_asymptotic = {(1.0 - kPi * kPi / (16.0 * gamma)) * a, a};
  b.mmse_algebraic = {e / std::sqrt(1.0 + 2.0 * gamma), e};
  b.neg_dmmse_asymptotic = {(1.0 - (kPi * kPi / 8.0 - 1.0) / (2.0 * gamma)) * a, a};
  b.neg_dmmse_algebraic = {2.0 * e / std::sqrt(1.0 + 6.0 * gamma), 2.0 * e};
  return b;
}

Bracket pam_pointwise_bracket(int m, double d, double y, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  RealAlphabet a = pam_alphabet(m, d);
  const double t = y / d + 0.5 * (m - 1);
  const int j = std::clamp(static_cast<int>(std::floor(t)), 0, m - 2);
  const double mid = 0.5 * (a.levels[j] + a.levels[j + 1]);
  const double h = 0.5 * d;
  const double rho = h * h * gamma;
  Bracket b;
  b.lower = h * h * phi_bpsk((y - mid) / h, rho);
  b.upper = b.lower + h * h * d_up(rho);
  return b;
}

bool verify_removal_lemma(int m, double d, double y, double gamma) {
  if (m < 3) throw std::invalid_argument("removal lemma needs M >= 3");
  RealAlphabet full = pam_alphabet(m, d);
  RealAlphabet reduced = full;
  const bool drop_first = std::fabs(y - full.levels.front()) >= std::fabs(y - full.levels.back());
  if (drop_first) {
    reduced.levels.erase(reduced.levels.begin());
  } else {
    reduced.levels.pop_back();
  }
  reduced.probs.assign(m - 1, 1.0 / (m - 1));
  const double px = pointwise_real(full, y, gamma);
  const double pr = pointwise_real(reduced, y, gamma);
  return px >= pr * (1.0 - 1e-12);
}

Bracket pam_mmse_bracket(int m, double d, double gamma) {
  if (m < 2) throw std::invalid_argument("PAM size must be >= 2");
  const double h2 = 0.25 * d * d;
  const double rho = h2 * gamma;
  const double k = 2.0 * (m - 1.0) / m * h2;
  const double base = bpsk_mmse_closed(rho);
  return {k * (base - b_low(rho)), k * (base + b_up(rho))};
}

Bracket pam_dmmse_bracket(int m, double d, double gamma) {
  if (m < 2) throw std::invalid_argument("PAM size must be >= 2");
  const double h2 = 0.25 * d * d;
  const double rho = h2 * gamma;
  const double k = 2.0 * (m - 1.0) / m * h2 * h2;
  const double base = bpsk_dmmse_closed(rho);
  return {k * (base - c_low(rho)), k * (base + c_up(rho))};
}

DecayFit decay_rate_check(const Constellation& c, double gamma_lo, double gamma_hi, int points) {
  if (c.size() < 2) throw std::invalid_argument("decay fit needs a finite alphabet of size >= 2");
  if (points < 3) throw std::invalid_argument("decay fit needs at least 3 points");
  const double h = 0.5 * min_distance(c);
  DecayFit fit;
  fit.reference = -h * h;
  if (gamma_lo <= 0.0) gamma_lo = 4.0 / (h * h);
  if (gamma_hi <= 0.0) gamma_hi = 12.0 / (h * h);
  if (!(gamma_hi > gamma_lo)) throw std::invalid_argument("decay fit needs gamma_hi > gamma_lo");
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double g = gamma_lo + (gamma_hi - gamma_lo) * i / (points - 1);
    const double v = -mmse_derivative(c, g);
    if (!(v > 1e-280) || !std::isfinite(v)) {
      fit.range_shrunk = true;
      break;
    }
    xs.push_back(g);
    ys.push_back(std::log(v * std::sqrt(g)));
  }
  if (xs.size() < 3) throw std::runtime_error("mmse derivative underflows over the decay-fit range");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.gamma_lo = xs.front();
  fit.gamma_hi = xs.back();
  fit.points = static_cast<int>(xs.size());
  return fit;
}

bool BoundSweep::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

BoundSweep verify_pam_brackets(const std::vector<int>& sizes, double d, double rho_min,
                               double rho_max, int gamma_points, int y_samples) {
  if (!(rho_min > 0.0) || !(rho_max >= rho_min) || gamma_points < 1 || y_samples < 0)
    throw std::invalid_argument("invalid bracket sweep parameters");
  const double h2 = 0.25 * d * d;
  BoundSweep out;
  auto add = [&](const char* q, int m, double g, const Bracket& b, double v, bool pass) {
    out.rows.push_back({m, d, g, h2 * g, b.lower, v, b.upper, pass});
    out.quantity.push_back(q);
  };
  for (int m : sizes) {
    const RealAlphabet a = pam_alphabet(m, d);
    for (int i = 0; i < gamma_points; ++i) {
      const double t = gamma_points == 1 ? 0.0 : static_cast<double>(i) / (gamma_points - 1);
      const double rho = rho_min * std::pow(rho_max / rho_min, t);
      const double g = rho / h2;
      // Bracket widths fall below double resolution at high rho, hence the
      // relative slack around the quadrature value.
      Bracket bm = pam_mmse_bracket(m, d, g);
      const double vm = pam_mmse(m, d, g);
      add("mmse", m, g, bm, vm, bm.contains(vm, 1e-10));
      Bracket bd = pam_dmmse_bracket(m, d, g);
      const double vd = pam_dmmse(m, d, g);
      add("dmmse", m, g, bd, vd, bd.contains(vd, 1e-10));
      const double y_lo = a.levels.front() - d, y_hi = a.levels.back() + d;
      for (int k = 0; k < y_samples; ++k) {
        const double y = y_lo + (y_hi - y_lo) * (k + 0.5) / y_samples;
        Bracket bp = pam_pointwise_bracket(m, d, y, g);
        const double vp = pointwise_real(a, y, g);
        add("pointwise", m, g, bp, vp, bp.contains(vp, 1e-12, 1e-12 * h2));
      }
    }
  }
  return out;
}

void write_sweep_csv(const BoundSweep& s, const std::string& path) {
  CsvWriter w({"quantity", "M", "d", "gamma", "rho", "lower", "value", "upper", "pass"});
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    w.row({s.quantity[i], std::to_string(r.m), fmt6(r.d), fmt6(r.gamma), fmt6(r.rho), fmt6(r.lower),
           fmt6(r.value), fmt6(r.upper), r.pass ? "1" : "0"});
  }
  w.save(path);
}

}  // namespace isirate
