#include "isirate/isi_channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "isirate/io.hpp"
#include "isirate/special.hpp"

namespace isirate {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRelTol = 1e-10;
constexpr int kMaxPoints = 1 << 20;

double covered_length(const std::vector<Segment>& segs) {
  double len = 0.0;
  for (const auto& s : segs) len += s.theta_hi - s.theta_lo;
  return len;
}

// Mean of f over the period on a uniform grid, doubling until two successive
// estimates agree. The new points of each level are evaluated in parallel
// when parallel is set.
template <class F>
ThetaIntegral periodic_mean(F f, int n_start, bool parallel, double (*post)(double)) {
  if (n_start < 2) throw std::invalid_argument("theta grid needs at least 2 points");
  int n = n_start;
  std::vector<double> vals(n);
  auto fill = [&](std::vector<double>& v, int count, double offset, double step) {
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
      for (int k = 0; k < count; ++k) v[k] = f(-kPi + offset + k * step);
    } else {
      for (int k = 0; k < count; ++k) v[k] = f(-kPi + offset + k * step);
    }
  };
  fill(vals, n, 0.0, 2.0 * kPi / n);
  double sum = 0.0;
  for (double v : vals) sum += v;
  double est = post(sum / n);
  while (n < kMaxPoints) {
    const double step = 2.0 * kPi / n;
    std::vector<double> mid(n);
    fill(mid, n, 0.5 * step, step);
    for (double v : mid) sum += v;
    n *= 2;
    const double next = post(sum / n);
    if (std::fabs(next - est) <= kRelTol * std::fabs(next) + 1e-300) return {next, n};
    est = next;
  }
  throw std::runtime_error("theta integral did not converge under grid doubling");
}

double identity(double x) { return x; }
double expm1_post(double x) { return std::expm1(x); }

}  // namespace

IsiChannel IsiChannel::from_taps(std::vector<cplx> taps) {
  if (taps.empty()) throw std::invalid_argument("channel needs at least one tap");
  bool nonzero = false;
  for (const auto& h : taps) {
    if (!std::isfinite(h.real()) || !std::isfinite(h.imag())) throw std::invalid_argument("non-finite channel tap");
    if (h != cplx(0.0)) nonzero = true;
  }
  if (!nonzero) throw std::invalid_argument("channel needs a nonzero tap");
  IsiChannel c;
  c.taps_ = std::move(taps);
  return c;
}

IsiChannel IsiChannel::from_segments(std::vector<Segment> segments) {
  if (segments.empty()) throw std::invalid_argument("piecewise channel needs at least one segment");
  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) { return a.theta_lo < b.theta_lo; });
  bool positive = false;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.theta_lo >= -kPi - 1e-12) || !(s.theta_hi <= kPi + 1e-12) || !(s.theta_hi > s.theta_lo))
      throw std::invalid_argument("segment bounds must satisfy -pi <= lo < hi <= pi");
    if (!(s.gain_sq >= 0.0) || !std::isfinite(s.gain_sq)) throw std::invalid_argument("segment gain must be >= 0");
    if (i > 0 && s.theta_lo < segments[i - 1].theta_hi - 1e-12) throw std::invalid_argument("segments overlap");
    if (s.gain_sq > 0.0) positive = true;
  }
  if (!positive) throw std::invalid_argument("piecewise channel needs a positive gain");
  IsiChannel c;
  c.piecewise_ = true;
  c.segments_ = std::move(segments);
  return c;
}

double IsiChannel::transfer(double theta) const {
  if (piecewise_) {
    for (const auto& s : segments_)
      if (theta >= s.theta_lo && theta <= s.theta_hi) return s.gain_sq;
    return 0.0;
  }
  cplx h = 0.0;
  for (std::size_t k = 0; k < taps_.size(); ++k) h += taps_[k] * std::polar(1.0, -static_cast<double>(k) * theta);
  return std::norm(h);
}

double IsiChannel::input_snr() const {
  double s = 0.0;
  if (piecewise_) {
    for (const auto& g : segments_) s += (g.theta_hi - g.theta_lo) / (2.0 * kPi) * g.gain_sq;
  } else {
    for (const auto& h : taps_) s += std::norm(h);
  }
  return s;
}

namespace {

// Extremum of |H|^2 on a dense grid refined by golden section. sign = +1
// for the maximum, -1 for the minimum.
double tap_extremum(const IsiChannel& ch, double sign) {
  const int n = std::max(4096, 64 * static_cast<int>(ch.taps().size()));
  const double step = 2.0 * kPi / n;
  int best = 0;
  double bv = -INFINITY;
  for (int k = 0; k < n; ++k) {
    const double v = sign * ch.transfer(-kPi + k * step);
    if (v > bv) {
      bv = v;
      best = k;
    }
  }
  double a = -kPi + (best - 1) * step, b = -kPi + (best + 1) * step;
  const double r = 0.61803398874989484820;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = sign * ch.transfer(c), fd = sign * ch.transfer(d);
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = sign * ch.transfer(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = sign * ch.transfer(d);
    }
  }
  return sign * std::max({bv, fc, fd});
}

}  // namespace

double IsiChannel::max_gain() const {
  if (!piecewise_) return tap_extremum(*this, 1.0);
  double m = 0.0;
  for (const auto& s : segments_) m = std::max(m, s.gain_sq);
  return m;
}

double IsiChannel::min_gain() const {
  if (!piecewise_) return std::max(0.0, tap_extremum(*this, -1.0));
  if (covered_length(segments_) < 2.0 * kPi - 1e-12) return 0.0;
  double m = INFINITY;
  for (const auto& s : segments_) m = std::min(m, s.gain_sq);
  return m;
}

IsiChannel IsiChannel::scaled_to(double target_snr) const {
  if (!(target_snr > 0.0) || !std::isfinite(target_snr)) throw std::invalid_argument("target SNR must be > 0");
  const double f = target_snr / input_snr();
  IsiChannel c = *this;
  for (auto& h : c.taps_) h *= std::sqrt(f);
  for (auto& s : c.segments_) s.gain_sq *= f;
  return c;
}

IsiChannel channel_80211n() {
  const double mag[] = {0.62, 0.42, 0.33, 0.091, 0.51, 0.25, 0.039, 0.028, 0.039};
  const double arg[] = {1.3, 2.8, -1.3, 2.5, 0.66, 2.0, -0.087, -0.28, 1.7};
  std::vector<cplx> taps;
  for (int k = 0; k < 9; ++k) taps.push_back(std::polar(mag[k], arg[k]));
  // The listed taps are rounded; renormalize to unit input SNR.
  return IsiChannel::from_taps(std::move(taps)).scaled_to(1.0);
}

IsiChannel channel_from_json_text(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("channel JSON: ") + e.what());
  }
  if (j.contains("taps")) {
    std::vector<cplx> taps;
    for (const auto& t : j.at("taps")) {
      if (!t.is_array() || t.size() != 2) throw std::invalid_argument("channel JSON: taps must be [re, im] pairs");
      taps.emplace_back(t[0].get<double>(), t[1].get<double>());
    }
    return IsiChannel::from_taps(std::move(taps));
  }
  if (j.contains("piecewise")) {
    std::vector<Segment> segs;
    for (const auto& s : j.at("piecewise"))
      segs.push_back({s.at("theta_lo").get<double>(), s.at("theta_hi").get<double>(), s.at("gain_sq").get<double>()});
    return IsiChannel::from_segments(std::move(segs));
  }
  throw std::invalid_argument("channel JSON needs a 'taps' or 'piecewise' field");
}

IsiChannel load_channel_json(const std::string& path) { return channel_from_json_text(read_text_file(path)); }

IsiChannel resolve_channel(const std::string& spec) {
  if (spec == "80211n" || spec == "802.11n") return channel_80211n();
  if (spec == "flat") return IsiChannel::from_taps({cplx(1.0, 0.0)});
  return load_channel_json(spec);
}

IsiChannel random_channel(std::uint64_t seed, int max_taps, double snr_db_lo, double snr_db_hi) {
  if (max_taps < 1) throw std::invalid_argument("max_taps must be >= 1");
  if (!(snr_db_hi >= snr_db_lo)) throw std::invalid_argument("empty SNR range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, max_taps);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  std::uniform_real_distribution<double> db(snr_db_lo, snr_db_hi);
  const int l = len(rng);
  std::vector<cplx> taps(l);
  for (auto& h : taps) {
    const double re = g(rng);
    h = cplx(re, g(rng));
  }
  const double target = std::pow(10.0, db(rng) / 10.0);
  return IsiChannel::from_taps(std::move(taps)).scaled_to(target);
}

ThetaIntegral snr_mmse_dfe_u_detail(const IsiChannel& ch, int n_start) {
  if (ch.is_piecewise()) {
    double m = 0.0;
    for (const auto& s : ch.segments()) m += (s.theta_hi - s.theta_lo) / (2.0 * kPi) * std::log1p(s.gain_sq);
    return {std::expm1(m), 0};
  }
  return periodic_mean([&](double t) { return std::log1p(ch.transfer(t)); }, n_start, false, expm1_post);
}

double snr_mmse_dfe_u(const IsiChannel& ch, int n_start) { return snr_mmse_dfe_u_detail(ch, n_start).value; }

double rate_sl(const InputModel& x, const IsiChannel& ch) { return x.info(snr_mmse_dfe_u(ch)); }

namespace {

ThetaIntegral ofdm(const InputModel& x, const IsiChannel& ch, int n_start, bool parallel) {
  if (ch.is_piecewise()) {
    double r = 0.0;
    for (const auto& s : ch.segments())
      if (s.gain_sq > 0.0) r += (s.theta_hi - s.theta_lo) / (2.0 * kPi) * x.info(s.gain_sq);
    return {r, 0};
  }
  return periodic_mean([&](double t) { return x.info(ch.transfer(t)); }, n_start, parallel, identity);
}

}  // namespace

ThetaIntegral rate_ofdm_detail(const InputModel& x, const IsiChannel& ch, int n_start) {
  return ofdm(x, ch, n_start, true);
}

double rate_ofdm(const InputModel& x, const IsiChannel& ch, int n_start) { return ofdm(x, ch, n_start, true).value; }

double rate_ofdm_serial(const InputModel& x, const IsiChannel& ch, int n_start) {
  return ofdm(x, ch, n_start, false).value;
}

IsiChannel extremal_channel(ExtremalKind kind, const ConcavityReport* report, double gamma_param) {
  if (kind == ExtremalKind::SHARP) {
    if (!(gamma_param >= 1.0)) throw std::invalid_argument("SHARP channel needs Gamma >= 1");
    if (gamma_param * gamma_param > 700.0) throw std::invalid_argument("SHARP channel: Gamma too large for doubles");
    const double w = kPi / gamma_param;
    return IsiChannel::from_segments({{-w, w, std::expm1(gamma_param * gamma_param)}});
  }
  if (report == nullptr || report->bridges.empty() || !(report->delta_x_nats > 0.0))
    throw std::invalid_argument("MIN_DIFF channel needs a report with delta_x > 0");
  const Bridge* b = &report->bridges.front();
  for (const auto& c : report->bridges)
    if (c.delta > b->delta) b = &c;
  const double frac = (b->zeta2 - b->zeta_m) / (b->zeta2 - b->zeta1);
  const double w = kPi * frac;
  const double g1 = std::expm1(b->zeta1), g2 = std::expm1(b->zeta2);
  std::vector<Segment> segs;
  if (w < kPi) segs.push_back({-kPi, -w, g2});
  segs.push_back({-w, w, g1});
  if (w < kPi) segs.push_back({w, kPi, g2});
  return IsiChannel::from_segments(std::move(segs));
}

double subcarrier_ser(int qam_order, double gamma) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(qam_order))));
  if (side < 2 || side * side != qam_order) throw std::invalid_argument("subcarrier_ser needs square QAM order >= 4");
  if (!(gamma > 0.0)) throw std::invalid_argument("subcarrier_ser needs gamma > 0");
  const double half_dmin_sq = 1.5 / (qam_order - 1.0);
  const double q = q_function(std::sqrt(half_dmin_sq * gamma));
  const double p = 2.0 * (side - 1.0) / side * q;
  return 2.0 * p - p * p;
}

RateComparison compare_rates(const InputModel& x, const IsiChannel& ch) {
  const double ln2 = std::log(2.0);
  RateComparison r;
  r.input_snr_db = 10.0 * std::log10(ch.input_snr());
  r.snr_dfe = snr_mmse_dfe_u(ch);
  r.i_sl_bits = x.info(r.snr_dfe) / ln2;
  r.i_ofdm_bits = rate_ofdm(x, ch) / ln2;
  r.diff_bits = r.i_sl_bits - r.i_ofdm_bits;
  return r;
}

std::vector<RateComparison> sweep_compare(const InputModel& x, const IsiChannel& ch, double snr_db_lo,
                                          double snr_db_hi, int steps) {
  if (steps < 1) throw std::invalid_argument("sweep needs at least one step");
  std::vector<RateComparison> out;
  for (int i = 0; i < steps; ++i) {
    const double db = steps == 1 ? snr_db_lo : snr_db_lo + (snr_db_hi - snr_db_lo) * i / (steps - 1);
    out.push_back(compare_rates(x, ch.scaled_to(std::pow(10.0, db / 10.0))));
  }
  return out;
}

void write_sweep_csv(const std::vector<RateComparison>& rows, const std::string& path) {
  CsvWriter w({"input_snr_db", "snr_dfe_db", "i_sl_bits", "i_ofdm_bits", "diff_bits"});
  for (const auto& r : rows)
    w.row_numbers({r.input_snr_db, 10.0 * std::log10(r.snr_dfe), r.i_sl_bits, r.i_ofdm_bits, r.diff_bits});
  w.save(path);
}

double required_snr_db(const InputModel& x, const IsiChannel& ch, double target_bits, bool sl, double db_lo,
                       double db_hi, double tol_db) {
  if (!(tol_db > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const double target = target_bits * std::log(2.0);
  auto rate = [&](double db) {
    IsiChannel c = ch.scaled_to(std::pow(10.0, db / 10.0));
    return sl ? rate_sl(x, c) : rate_ofdm(x, c);
  };
  double lo = db_lo, hi = db_hi;
  if (rate(lo) > target || rate(hi) < target) return NAN;
  while (hi - lo > tol_db) {
    const double mid = 0.5 * (lo + hi);
    if (rate(mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> log_snr_samples(const IsiChannel& ch, int n) {
  if (n < 2) throw std::invalid_argument("need at least 2 samples");
  std::vector<std::pair<double, double>> out;
  for (int k = 0; k < n; ++k) {
    const double t = -kPi + 2.0 * kPi * (k + 1) / n;
    out.push_back({t, std::log1p(ch.transfer(t))});
  }
  return out;
}

}  // namespace isirate
