#include "isirate/logsnr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace isirate {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kConvexMargin = 1e-10;

bool convex_at(double ddilog) { return ddilog > kConvexMargin; }

// Root of f on [lo, hi] given f and f' via Newton steps kept inside a
// shrinking sign-change bracket. Falls back to the endpoint with the smaller
// residual when there is no sign change.
template <class F>
double safe_newton(F fdf, double lo, double hi, double tol) {
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) return std::fabs(flo) < std::fabs(fhi) ? lo : hi;
  const bool lo_negative = flo < 0.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    auto [f, df] = fdf(x);
    if (f == 0.0) return x;
    if ((f < 0.0) == lo_negative) lo = x;
    else hi = x;
    double xn = x - f / df;
    if (!std::isfinite(xn) || xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);
    if (std::fabs(xn - x) < tol || hi - lo < tol) return xn;
    x = xn;
  }
  return x;
}

template <class F>
double golden_max(F f, double a, double b, double tol, double* best_value) {
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
  double x = fc > fd ? c : d;
  if (best_value) *best_value = std::max(fc, fd);
  return x;
}

LogSnrProfile profile_shell(const InputModel& model, double resolution_bits) {
  if (!(resolution_bits > 0.0)) throw std::invalid_argument("profile resolution must be > 0");
  LogSnrProfile p;
  p.input_name = model.name();
  p.entropy_nats = model.entropy_nats();
  p.resolution_bits = resolution_bits;
  return p;
}

void push_point(LogSnrProfile& p, const LogPoint& q) {
  p.zeta_grid.push_back(q.zeta);
  p.ilog.push_back(q.ilog);
  p.dilog.push_back(q.dilog);
  p.ddilog.push_back(q.ddilog);
  p.gap.push_back(q.gap);
}

LogSnrProfile build_saturating(const InputModel& model, const ProfileOptions& opt, bool parallel) {
  if (opt.resolution_bits > 0.01) throw std::invalid_argument("profile resolution must be <= 0.01 bits");
  if (!std::isfinite(model.entropy_nats()))
    throw std::invalid_argument("build_profile needs a finite-entropy input; use build_profile_range");
  LogSnrProfile p = profile_shell(model, opt.resolution_bits);
  const double step = opt.resolution_bits * kLn2;
  const int chunk = 256;
  std::vector<LogPoint> buf(chunk);
  for (long base = 0;; base += chunk) {
    if (base * step > opt.zeta_limit)
      throw std::runtime_error("input '" + model.name() + "' did not saturate before zeta = " +
                               std::to_string(opt.zeta_limit) + " nats");
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
      for (int i = 0; i < chunk; ++i) buf[i] = log_point(model, (base + i) * step);
    } else {
      for (int i = 0; i < chunk; ++i) buf[i] = log_point(model, (base + i) * step);
    }
    for (int i = 0; i < chunk; ++i) {
      push_point(p, buf[i]);
      if (buf[i].gap < opt.saturation_eps) {
        p.zeta_max = buf[i].zeta;
        return p;
      }
    }
  }
}

}  // namespace

LogPoint log_point(const InputModel& model, double zeta) {
  const double gamma = std::expm1(zeta);
  ScalarPoint s = model.evaluate(gamma);
  const double g1 = 1.0 + gamma;
  LogPoint q;
  q.zeta = zeta;
  q.ilog = s.info;
  q.dilog = g1 * s.mmse;
  q.ddilog = g1 * (s.mmse + g1 * s.dmmse);
  q.gap = s.gap;
  return q;
}

LogSnrProfile build_profile(const InputModel& model, const ProfileOptions& opt) {
  return build_saturating(model, opt, true);
}

LogSnrProfile build_profile_serial(const InputModel& model, const ProfileOptions& opt) {
  return build_saturating(model, opt, false);
}

LogSnrProfile build_profile_range(const InputModel& model, double zeta_end, double resolution_bits) {
  LogSnrProfile p = profile_shell(model, resolution_bits);
  const double step = resolution_bits * kLn2;
  const int n = static_cast<int>(std::ceil(zeta_end / step - 1e-9)) + 1;
  std::vector<LogPoint> buf(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) buf[i] = log_point(model, std::min(zeta_end, i * step));
  for (const auto& q : buf) push_point(p, q);
  p.zeta_max = p.zeta_grid.back();
  return p;
}

ConcavityThresholds concavity_thresholds(const LogSnrProfile& p, const InputModel& model) {
  ConcavityThresholds th;
  const std::size_t n = p.zeta_grid.size();
  if (n == 0) throw std::invalid_argument("empty profile");
  th.max_ddilog = *std::max_element(p.ddilog.begin(), p.ddilog.end());
  for (std::size_t i = 1; i < n; ++i)
    if (std::fabs(p.ddilog[i]) <= kConvexMargin && !(p.gap[i] < 1e-6)) th.borderline = true;
  if (th.max_ddilog <= kConvexMargin) {
    th.concave_everywhere = true;
    th.zeta0_low = th.zeta0_high = p.zeta_max;
    return th;
  }
  const double tol = 1e-6;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    bool a = convex_at(p.ddilog[i]);
    bool b = convex_at(p.ddilog[i + 1]);
    if (a == b) continue;
    double lo = p.zeta_grid[i], hi = p.zeta_grid[i + 1];
    while (hi - lo > tol) {
      double mid = 0.5 * (lo + hi);
      if (convex_at(log_point(model, mid).ddilog) == a) lo = mid;
      else hi = mid;
    }
    th.crossings.push_back(0.5 * (lo + hi));
  }
  th.anomaly = th.crossings.size() > 2;
  const bool starts_convex = convex_at(p.ddilog.front());
  const bool ends_convex = convex_at(p.ddilog.back());
  th.zeta0_low = starts_convex ? 0.0 : th.crossings.front();
  th.zeta0_high = ends_convex ? INFINITY : th.crossings.back();
  return th;
}

std::vector<double> hull_values(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> h;
  for (std::size_t i = 0; i < n; ++i) {
    while (h.size() >= 2) {
      std::size_t o = h[h.size() - 2], a = h.back();
      double cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o]);
      if (cross >= 0.0) h.pop_back();
      else break;
    }
    h.push_back(i);
  }
  std::vector<double> env(y);
  for (std::size_t j = 0; j + 1 < h.size(); ++j) {
    std::size_t a = h[j], b = h[j + 1];
    for (std::size_t i = a + 1; i < b; ++i) {
      double t = (x[i] - x[a]) / (x[b] - x[a]);
      env[i] = std::max(y[i], y[a] + t * (y[b] - y[a]));
    }
  }
  return env;
}

std::vector<std::pair<int, int>> hull_bridges(const std::vector<double>& x, const std::vector<double>& y,
                                              double tol) {
  std::vector<double> env = hull_values(x, y);
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(x.size());
  int i = 0;
  while (i < n) {
    if (env[i] - y[i] > tol) {
      int a = i - 1;
      while (i < n && env[i] - y[i] > tol) ++i;
      out.push_back({std::max(a, 0), std::min(i, n - 1)});
    } else {
      ++i;
    }
  }
  return out;
}

namespace {

struct BranchSolver {
  const InputModel& model;

  // zeta in [lo, hi] (a concave stretch, dilog decreasing) with dilog = s.
  double contact(double s, double lo, double hi) const {
    return safe_newton(
        [&](double z) {
          LogPoint q = log_point(model, z);
          return std::pair<double, double>{q.dilog - s, q.ddilog};
        },
        lo, hi, 1e-13);
  }
};

void refine_bridge(const InputModel& model, Bridge& b, double left_lo, double c_lo, double c_hi,
                   double right_hi) {
  BranchSolver solver{model};
  const double s_min = std::max(log_point(model, c_lo).dilog, log_point(model, right_hi).dilog);
  const double s_max = std::min(log_point(model, c_hi).dilog, log_point(model, left_lo).dilog);
  auto F = [&](double s) {
    double a = solver.contact(s, left_lo, c_lo);
    double z = solver.contact(s, c_hi, right_hi);
    double f = (model.info(std::expm1(z)) - s * z) - (model.info(std::expm1(a)) - s * a);
    return std::pair<double, double>{f, a - z};
  };
  double s = safe_newton(F, s_min, s_max, 1e-15);
  b.slope = s;
  b.zeta1 = solver.contact(s, left_lo, c_lo);
  b.zeta2 = solver.contact(s, c_hi, right_hi);
  b.tangency_mismatch = std::fabs(log_point(model, b.zeta1).dilog - log_point(model, b.zeta2).dilog);
}

double bridge_delta(const InputModel& model, Bridge& b, double c_lo, double c_hi) {
  const double i1 = model.info(std::expm1(b.zeta1));
  auto g = [&](double z) { return i1 + b.slope * (z - b.zeta1) - model.info(std::expm1(z)); };
  double best = 0.0;
  b.zeta_m = golden_max(g, c_lo, c_hi, 1e-9, &best);
  b.delta = std::max(0.0, best);
  return b.delta;
}

}  // namespace

ConcavityReport concave_envelope(const LogSnrProfile& p, const InputModel& model) {
  ConcavityReport r;
  r.input_name = p.input_name;
  r.dmin_half_sq_db = std::numeric_limits<double>::quiet_NaN();
  r.zeta_max = p.zeta_max;
  r.thresholds = concavity_thresholds(p, model);
  r.zeta1_low = p.zeta_max;
  r.zeta2_high = 0.0;
  if (r.thresholds.concave_everywhere) return r;

  const auto& cr = r.thresholds.crossings;
  auto grid = hull_bridges(p.zeta_grid, p.ilog);
  for (auto [i0, i1] : grid) {
    const double z0 = p.zeta_grid[i0], z1 = p.zeta_grid[i1];
    // convex stretch inside the bridge and the concave stretches around it
    double c_lo = NAN, c_hi = NAN, left_lo = 0.0, right_hi = p.zeta_max;
    for (double c : cr) {
      if (c <= z0) left_lo = c;
      else if (c < z1) {
        if (std::isnan(c_lo)) c_lo = c;
        c_hi = c;
      } else {
        right_hi = c;
        break;
      }
    }
    Bridge b;
    if (std::isnan(c_lo) || c_lo == c_hi) {
      // No resolvable convex stretch: keep the grid chord.
      b.zeta1 = z0;
      b.zeta2 = z1;
      b.slope = (p.ilog[i1] - p.ilog[i0]) / (z1 - z0);
      double best = 0.0;
      for (int i = i0; i <= i1; ++i) {
        double v = p.ilog[i0] + b.slope * (p.zeta_grid[i] - z0) - p.ilog[i];
        if (v > best) {
          best = v;
          b.zeta_m = p.zeta_grid[i];
        }
      }
      b.delta = best;
      r.bridges.push_back(b);
      continue;
    }
    refine_bridge(model, b, left_lo, c_lo, c_hi, right_hi);
    bridge_delta(model, b, c_lo, c_hi);
    r.bridges.push_back(b);
  }
  if (!r.bridges.empty()) {
    r.zeta1_low = r.bridges.front().zeta1;
    r.zeta2_high = r.bridges.back().zeta2;
  }
  for (const auto& b : r.bridges) r.delta_x_nats = std::max(r.delta_x_nats, b.delta);
  r.bridge_count_flag = r.bridges.size() > 1;
  return r;
}

double delta_x(const LogSnrProfile& p, const ConcavityReport& report, const InputModel& model) {
  double best = 0.0;
  const auto& cr = report.thresholds.crossings;
  for (Bridge b : report.bridges) {
    double c_lo = NAN, c_hi = NAN;
    for (double c : cr)
      if (c > b.zeta1 && c < b.zeta2) {
        if (std::isnan(c_lo)) c_lo = c;
        c_hi = c;
      }
    if (std::isnan(c_lo) || c_lo == c_hi) {
      best = std::max(best, b.delta);
      continue;
    }
    best = std::max(best, bridge_delta(model, b, c_lo, c_hi));
  }
  (void)p;
  return best;
}

double chord_gap(const InputModel& model, double g1, double g, double g2) {
  const double z1 = std::log1p(g1), z = std::log1p(g), z2 = std::log1p(g2);
  if (!(z2 - z1 > 1e-15)) return 0.0;
  const double i1 = model.info(g1), i = model.info(g), i2 = model.info(g2);
  return ((z - z1) * i2 + (z2 - z) * i1) / (z2 - z1) - i;
}

double delta_x_direct(const InputModel& model, const SearchSpec& spec) {
  if (!(spec.gamma_lo > 0.0) || !(spec.gamma_hi > spec.gamma_lo) || spec.coarse_points < 3)
    throw std::invalid_argument("invalid delta_x_direct search spec");
  const int n = spec.coarse_points;
  const double u_lo = std::log(spec.gamma_lo), u_hi = std::log(spec.gamma_hi);
  const double du = (u_hi - u_lo) / (n - 1);
  std::vector<double> z(n), info(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    double g = std::exp(u_lo + i * du);
    z[i] = std::log1p(g);
    info[i] = model.info(g);
  }
  double best = 0.0;
  int bi = 0, bj = 0, bk = 0;
  for (int i = 0; i < n; ++i)
    for (int k = i + 2; k < n; ++k)
      for (int j = i + 1; j < k; ++j) {
        double v = ((z[j] - z[i]) * info[k] + (z[k] - z[j]) * info[i]) / (z[k] - z[i]) - info[j];
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
          bk = k;
        }
      }
  if (best <= 0.0) return 0.0;

  // Coordinate ascent in log-gamma, each coordinate by golden section within
  // one coarse step of its current value.
  double u[3] = {u_lo + bi * du, u_lo + bj * du, u_lo + bk * du};
  auto objective = [&](const double* v) {
    return chord_gap(model, std::exp(v[0]), std::exp(v[1]), std::exp(v[2]));
  };
  double current = objective(u);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double before = current;
    for (int c = 0; c < 3; ++c) {
      double lo = u[c] - du, hi = u[c] + du;
      if (c == 0) hi = std::min(hi, u[1]);
      if (c == 1) {
        lo = std::max(lo, u[0]);
        hi = std::min(hi, u[2]);
      }
      if (c == 2) lo = std::max(lo, u[1]);
      lo = std::max(lo, u_lo);
      hi = std::min(hi, u_hi);
      if (!(hi > lo)) continue;
      double v[3] = {u[0], u[1], u[2]};
      double val = 0.0;
      double x = golden_max(
          [&](double t) {
            v[c] = t;
            return objective(v);
          },
          lo, hi, 1e-10, &val);
      if (val > current) {
        u[c] = x;
        current = val;
      }
    }
    if (current - before <= 1e-16 + 1e-12 * current) break;
  }
  return current;
}

std::string report_json(const ConcavityReport& r) {
  using nlohmann::json;
  auto num = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  json j;
  j["input"] = r.input_name;
  j["dmin_half_sq_db"] = num(r.dmin_half_sq_db);
  j["concave_everywhere"] = r.thresholds.concave_everywhere;
  const bool has = !r.thresholds.concave_everywhere;
  j["gamma1_low_db"] = has && !r.bridges.empty() ? num(zeta_to_db(r.zeta1_low)) : json(nullptr);
  j["gamma0_low_db"] = has ? num(zeta_to_db(r.thresholds.zeta0_low)) : json(nullptr);
  j["gamma0_high_db"] = has ? num(zeta_to_db(r.thresholds.zeta0_high)) : json(nullptr);
  j["gamma2_high_db"] = has && !r.bridges.empty() ? num(zeta_to_db(r.zeta2_high)) : json(nullptr);
  j["delta_x_bits"] = r.delta_x_nats / std::log(2.0);
  j["zeta_max_nats"] = r.zeta_max;
  j["anomaly"] = r.thresholds.anomaly;
  j["borderline"] = r.thresholds.borderline;
  j["max_ddilog"] = r.thresholds.max_ddilog;
  json bridges = json::array();
  for (const auto& b : r.bridges) {
    bridges.push_back({{"zeta1_nats", b.zeta1},
                       {"zeta2_nats", b.zeta2},
                       {"contact_slope", b.slope},
                       {"zeta_m_nats", b.zeta_m},
                       {"delta_bits", b.delta / std::log(2.0)},
                       {"tangency_mismatch", b.tangency_mismatch}});
  }
  j["bridges"] = bridges;
  return j.dump(2);
}

}  // namespace isirate
