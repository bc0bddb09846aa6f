#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isirate/bounds.hpp"
#include "isirate/constellation.hpp"
#include "isirate/io.hpp"
#include "isirate/isi_channel.hpp"
#include "isirate/logsnr.hpp"
#include "isirate/parallel.hpp"
#include "isirate/scalar_channel.hpp"
#include "isirate/uniform_input.hpp"

using namespace isirate;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
// Non-separable inputs use the 2D path, whose profile is built on a coarser grid.
constexpr double kGrid2dBits = 5e-3;

struct RunConfig {
  std::string command;
  std::vector<std::string> constellations;
  std::string channel = "80211n";
  double snr_db = NAN;
  std::vector<double> snr_range;
  int steps = 0;
  double grid_bits = 5e-4;
  int quad_order = 96;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<std::string> skip;
  std::string reference = std::string(ISIRATE_DATA_DIR) + "/reference_values.json";
  double rho_min = 0.5;
  double d = 2.0;

  void validate() const {
    if (!(grid_bits > 0.0 && grid_bits <= 0.01)) throw std::invalid_argument("--grid-bits must lie in (0, 0.01]");
    if (quad_order < 8 || quad_order > 400) throw std::invalid_argument("--quad-order must lie in [8, 400]");
    if (steps < 0 || steps > 100000) throw std::invalid_argument("--steps must lie in [1, 100000]");
    if (!snr_range.empty() && (snr_range.size() != 2 || !(snr_range[1] > snr_range[0])))
      throw std::invalid_argument("--snr-range needs LO HI with LO < HI");
    if (!std::isnan(snr_db) && !std::isfinite(snr_db)) throw std::invalid_argument("--snr-db must be finite");
    if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("--d must be positive");
    if (!(rho_min > 0.0 && rho_min < 16.0)) throw std::invalid_argument("--rho-min must lie in (0, 16)");
  }

  json to_json() const {
    return {{"command", command},       {"constellation", constellations},
            {"channel", channel},       {"snr_db", std::isnan(snr_db) ? json(nullptr) : json(snr_db)},
            {"snr_range", snr_range},   {"steps", steps},
            {"grid_bits", grid_bits},   {"quad_order", quad_order},
            {"seed", seed},             {"out", out},
            {"skip", skip},             {"reference", reference},
            {"rho_min", rho_min},       {"d", d}};
  }
};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string slug(const std::string& s) {
  std::string o;
  for (char c : s) o += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  return o;
}

class Run {
 public:
  explicit Run(const RunConfig& cfg) : cfg_(cfg) {}

  std::string path(const std::string& file) const { return (std::filesystem::path(cfg_.out) / file).string(); }

  void save(const std::string& file, const std::string& body, json extra = json::object()) const {
    const std::string p = path(file);
    write_text_file(p, body);
    extra["config"] = cfg_.to_json();
    extra["version"] = kVersion;
    extra["threads"] = thread_count();
    extra["generated_utc"] = utc_now();
    write_text_file(sidecar_path(p), extra.dump(2) + "\n");
    std::printf("wrote %s\n", p.c_str());
  }

  void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures_;
  }

  int exit_code() const { return failures_ == 0 ? 0 : 1; }
  const RunConfig& cfg() const { return cfg_; }

 private:
  RunConfig cfg_;
  int failures_ = 0;
};

bool is_uniform(const std::string& s) { return s == "inf-QAM" || s == "uniform"; }

std::unique_ptr<InputModel> make_input(const std::string& spec, int quad_order) {
  if (is_uniform(spec)) return std::make_unique<UniformInput>();
  if (spec == "Gaussian") return std::make_unique<GaussianInput>();
  QuadConfig q;
  q.order = quad_order;
  if (std::filesystem::is_regular_file(spec)) return std::make_unique<ScalarChannel>(load_constellation_json(spec), q);
  return std::make_unique<ScalarChannel>(make_named(spec), q);
}

json load_reference(const std::string& path) { return json::parse(read_text_file(path)); }

bool skipped(const RunConfig& cfg, const std::string& name) {
  for (const auto& s : cfg.skip)
    if (name.find(s) != std::string::npos) return true;
  return false;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double bits(double nats) { return nats_to_bits(nats); }

ConcavityReport analyze_constellation(const ScalarChannel& ch, double grid_bits, LogSnrProfile* profile = nullptr) {
  ProfileOptions o;
  o.resolution_bits = ch.method() == QuadMethod::HERMITE_2D ? std::max(grid_bits, kGrid2dBits) : grid_bits;
  LogSnrProfile p = build_profile(ch, o);
  ConcavityReport r = concave_envelope(p, ch);
  const double h = 0.5 * min_distance(ch.constellation());
  r.dmin_half_sq_db = lin_to_db(h * h);
  if (profile) *profile = std::move(p);
  return r;
}

int cmd_table1(Run& run) {
  const RunConfig& cfg = run.cfg();
  const json ref = load_reference(cfg.reference);
  const json& t = ref.at("table1");
  CsvWriter table({"input", "dmin_half_sq_db", "gamma1_low_db", "gamma0_low_db", "gamma0_high_db",
                   "gamma2_high_db", "delta_bits", "pass"});
  CsvWriter diff({"input", "quantity", "computed", "reference", "tolerance", "pass"});
  json reports = json::array();
  auto compare = [&](const std::string& input, const std::string& q, double v, double r, double tol, bool rel) {
    const double err = rel ? std::fabs(v - r) / std::fabs(r) : std::fabs(v - r);
    const bool ok = err <= tol;
    diff.row({input, q, fmt6(v), fmt6(r), fmt6(tol) + (rel ? " rel" : ""), ok ? "1" : "0"});
    run.check(ok, input + " " + q + " = " + fmt("%.6g", v) + " (reference " + fmt("%.6g", r) + ")");
    return ok;
  };

  for (const auto& name : t.at("concave_everywhere")) {
    const std::string n = name.get<std::string>();
    if (skipped(cfg, n)) continue;
    ScalarChannel ch(make_named(n), {cfg.quad_order});
    ConcavityReport r = analyze_constellation(ch, cfg.grid_bits);
    const bool ok = r.thresholds.concave_everywhere && r.delta_x_nats == 0.0 && !r.thresholds.anomaly;
    table.row({n, fmt6(r.dmin_half_sq_db), "", "", "", "", fmt6(bits(r.delta_x_nats)), ok ? "1" : "0"});
    diff.row({n, "concave_everywhere", ok ? "1" : "0", "1", "0", ok ? "1" : "0"});
    run.check(ok, n + " concave everywhere (max ddilog " + fmt("%.3g", r.thresholds.max_ddilog) + ")");
    reports.push_back(json::parse(report_json(r)));
  }

  for (const auto& row : t.at("rows")) {
    const std::string n = row.at("input");
    if (skipped(cfg, n)) continue;
    ScalarChannel ch(make_named(n), {cfg.quad_order});
    ConcavityReport r = analyze_constellation(ch, cfg.grid_bits);
    const double tol = row.at("tol_db");
    const double g1 = zeta_to_db(r.zeta1_low), g0 = zeta_to_db(r.thresholds.zeta0_low);
    const double G0 = zeta_to_db(r.thresholds.zeta0_high), G2 = zeta_to_db(r.zeta2_high);
    const double dx = bits(r.delta_x_nats);
    bool ok = !r.thresholds.concave_everywhere && !r.thresholds.anomaly;
    run.check(ok, n + " has a single convex stretch");
    ok &= compare(n, "gamma1_low_db", g1, row.at("gamma1_low_db"), tol, false);
    ok &= compare(n, "gamma0_low_db", g0, row.at("gamma0_low_db"), tol, false);
    ok &= compare(n, "gamma0_high_db", G0, row.at("gamma0_high_db"), tol, false);
    ok &= compare(n, "gamma2_high_db", G2, row.at("gamma2_high_db"), tol, false);
    ok &= compare(n, "delta_bits", dx, row.at("delta_bits"), row.at("delta_rel_tol"), true);
    table.row({n, fmt6(r.dmin_half_sq_db), fmt6(g1), fmt6(g0), fmt6(G0), fmt6(G2), fmt6(dx), ok ? "1" : "0"});
    reports.push_back(json::parse(report_json(r)));
  }

  if (!skipped(cfg, "inf-QAM")) {
    const json& u = t.at("uniform");
    const double g0 = zeta_to_db(uniform_zeta0_low());
    const double dx = bits(shaping_offset());
    bool ok = compare("inf-QAM", "gamma0_low_db", g0, u.at("gamma0_low_db"), u.at("tol_db"), false);
    ok &= compare("inf-QAM", "delta_bits", dx, u.at("delta_bits"), u.at("delta_abs_tol"), false);
    table.row({"inf-QAM", "-inf", "", fmt6(g0), "", "", fmt6(dx), ok ? "1" : "0"});
  }

  run.save("table1.csv", table.str(), {{"reference_version", ref.at("version")}, {"reports", reports}});
  run.save("table1_diff.csv", diff.str(), {{"reference_version", ref.at("version")}});
  return run.exit_code();
}

int cmd_deltabar_curve(Run& run) {
  const RunConfig& cfg = run.cfg();
  const double lo = cfg.snr_range.empty() ? 5.0 : cfg.snr_range[0];
  const double hi = cfg.snr_range.empty() ? 100.0 : cfg.snr_range[1];
  const int steps = cfg.steps > 0 ? cfg.steps : 96;
  std::vector<double> db(steps);
  for (int i = 0; i < steps; ++i) db[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  std::vector<DeltaBar> curve = deltabar_curve(db);
  CsvWriter w({"gamma_db", "deltabar_bits"});
  bool monotone = true;
  for (int i = 0; i < steps; ++i) {
    w.row_numbers({db[i], bits(curve[i].value_nats)});
    if (i > 0 && curve[i].value_nats < curve[i - 1].value_nats - 1e-12) monotone = false;
  }
  run.check(monotone, "deltabar non-decreasing in gamma");

  const double z0_db = zeta_to_db(uniform_zeta0_low());
  bool zero_below = true;
  for (int i = 0; i < steps; ++i)
    if (db[i] <= z0_db && curve[i].value_nats != 0.0) zero_below = false;
  run.check(zero_below, "deltabar = 0 at or below " + fmt("%.4g", z0_db) + " dB");

  const json ref = load_reference(cfg.reference).at("uniform").at("deltabar");
  for (const auto& pt : ref) {
    const double g = pt.at("gamma_bar_db");
    if (g < lo || g > hi) continue;
    const double v = bits(deltabar(db_to_lin(g)).value_nats);
    const double r = pt.at("bits");
    run.check(std::fabs(v - r) <= pt.at("tol").get<double>(),
              "deltabar(" + fmt("%g", g) + " dB) = " + fmt("%.5g", v) + " (reference " + fmt("%g", r) + ")");
  }
  run.save("deltabar.csv", w.str(), {{"zeta0_low_db", z0_db}});
  return run.exit_code();
}

IsiChannel channel_for(const std::string& spec, const InputModel& x, const RunConfig& cfg, double* expected_diff) {
  *expected_diff = NAN;
  if (spec.rfind("sharp:", 0) == 0) return extremal_channel(ExtremalKind::SHARP, nullptr, std::stod(spec.substr(6)));
  if (spec == "min-diff") {
    const auto* sc = dynamic_cast<const ScalarChannel*>(&x);
    if (!sc) throw std::invalid_argument("min-diff needs a finite constellation");
    ConcavityReport r = analyze_constellation(*sc, cfg.grid_bits);
    if (r.bridges.empty()) throw std::invalid_argument(x.name() + " has no convex stretch; min-diff undefined");
    *expected_diff = -bits(r.delta_x_nats);
    return extremal_channel(ExtremalKind::MIN_DIFF, &r, 0.0);
  }
  return resolve_channel(spec);
}

int cmd_channel_compare(Run& run) {
  const RunConfig& cfg = run.cfg();
  const json isi_ref = load_reference(cfg.reference).at("isi_experiments");
  std::vector<std::string> inputs = cfg.constellations;
  if (inputs.empty()) inputs = {"inf-QAM"};
  const bool extremal = cfg.channel == "min-diff" || cfg.channel.rfind("sharp:", 0) == 0;
  const std::string tag = slug(cfg.channel);

  for (const auto& spec : inputs) {
    auto x = make_input(spec, cfg.quad_order);
    double expected = NAN;
    IsiChannel ch = channel_for(cfg.channel, *x, cfg, &expected);
    const std::string base = "compare_" + slug(x->name()) + "_" + tag;

    if (extremal) {
      RateComparison c = compare_rates(*x, ch);
      c.input_snr_db = lin_to_db(ch.input_snr());
      write_sweep_csv({c}, run.path(base + ".csv"));
      run.save(base + ".csv", read_text_file(run.path(base + ".csv")), {{"input", x->name()}});
      if (!std::isnan(expected)) {
        run.check(std::fabs(c.diff_bits - expected) <= isi_ref.at("min_diff_tol_bits").get<double>(),
                  x->name() + " min-diff: diff " + fmt("%.8g", c.diff_bits) + " vs -delta " + fmt("%.8g", expected));
      } else {
        // 1 - 1/Gamma of the entropy, reached exactly once both rates saturate.
        const double gamma = std::stod(cfg.channel.substr(6));
        const double floor = bits(x->entropy_nats()) * (1.0 - 1.0 / gamma);
        run.check(c.diff_bits >= floor - 1e-9,
                  x->name() + " sharp: diff " + fmt("%.8g", c.diff_bits) + " >= " + fmt("%.8g", floor));
      }
      continue;
    }

    double lo = -10.0, hi = 60.0;
    if (!cfg.snr_range.empty()) lo = cfg.snr_range[0], hi = cfg.snr_range[1];
    int steps = cfg.steps > 0 ? cfg.steps : 36;
    if (!std::isnan(cfg.snr_db)) lo = hi = cfg.snr_db, steps = 1;
    std::vector<RateComparison> rows = sweep_compare(*x, ch, lo, hi, steps);
    write_sweep_csv(rows, run.path(base + ".csv"));
    run.save(base + ".csv", read_text_file(run.path(base + ".csv")), {{"input", x->name()}});

    double max_abs = 0.0;
    for (const auto& r : rows) max_abs = std::max(max_abs, std::fabs(r.diff_bits));
    if (cfg.channel == "flat") {
      run.check(max_abs <= 1e-9, x->name() + " flat channel: max|diff| " + fmt("%.3g", max_abs));
    } else if (is_uniform(spec) && (cfg.channel == "80211n" || cfg.channel == "802.11n")) {
      const double lim = isi_ref.at("uniform_80211n_max_abs_diff_bits");
      run.check(max_abs <= lim, "inf-QAM 802.11n: max|diff| " + fmt("%.5f", max_abs) + " <= " + fmt("%g", lim));
    }
    if (!std::isfinite(x->entropy_nats()) || cfg.channel == "flat") continue;

    // Input SNR at which each scheme reaches rate 5/6 of the input entropy.
    const double target = 5.0 / 6.0 * bits(x->entropy_nats());
    const double sl = required_snr_db(*x, ch, target, true, -10.0, 80.0, 1e-3);
    const double of = required_snr_db(*x, ch, target, false, -10.0, 80.0, 1e-3);
    CsvWriter g({"input", "target_bits", "sl_snr_db", "ofdm_snr_db", "gap_db"});
    g.row({x->name(), fmt6(target), fmt6(sl), fmt6(of), fmt6(of - sl)});
    run.save("rate_gap_" + slug(x->name()) + "_" + tag + ".csv", g.str());
    if (x->name() == "QPSK" && (cfg.channel == "80211n" || cfg.channel == "802.11n")) {
      const double floor = isi_ref.at("rate_5_6_gap_floor_db");
      run.check(of - sl >= floor, "QPSK rate-5/6 gap " + fmt("%.3f", of - sl) + " dB >= " + fmt("%g", floor));
    }
  }

  if (!extremal) {
    IsiChannel ch = resolve_channel(cfg.channel);
    CsvWriter w({"theta", "zeta_nats"});
    for (auto [th, z] : log_snr_samples(ch, 1024)) w.row_numbers({th, z});
    run.save("channel_" + tag + ".csv", w.str(), {{"input_snr", ch.input_snr()}});
  }
  return run.exit_code();
}

int cmd_verify_bounds(Run& run) {
  const RunConfig& cfg = run.cfg();
  std::vector<int> sizes;
  for (int m = 2; m <= 16; ++m) sizes.push_back(m);

  // Averaged brackets on rho in [0.5, 16]; the pointwise bracket over [rho_min, 16].
  BoundSweep avg = verify_pam_brackets(sizes, cfg.d, 0.5, 16.0, 40, 0);
  BoundSweep pw = verify_pam_brackets({3, 4, 5, 8, 16}, cfg.d, cfg.rho_min, 16.0, 40, 100);
  BoundSweep all;
  for (const BoundSweep* s : {&avg, &pw})
    for (std::size_t i = 0; i < s->rows.size(); ++i) {
      if (s == &pw && std::string(s->quantity[i]) != "pointwise") continue;
      all.rows.push_back(s->rows[i]);
      all.quantity.push_back(s->quantity[i]);
    }
  for (const char* q : {"pointwise", "mmse", "dmmse"}) {
    int n = 0, bad = 0;
    for (std::size_t i = 0; i < all.rows.size(); ++i) {
      if (std::string(all.quantity[i]) != q) continue;
      ++n;
      if (!all.rows[i].pass) {
        ++bad;
        const auto& r = all.rows[i];
        std::fprintf(stderr, "violation %s M=%d d=%g gamma=%.6g lower=%.17g value=%.17g upper=%.17g\n", q, r.m, r.d,
                     r.gamma, r.lower, r.value, r.upper);
      }
    }
    run.check(bad == 0, std::string(q) + " bracket: " + std::to_string(n) + " rows, " + std::to_string(bad) +
                            " violations");
  }
  write_sweep_csv(all, run.path("bounds_sweep.csv"));
  run.save("bounds_sweep.csv", read_text_file(run.path("bounds_sweep.csv")));

  CsvWriter b({"gamma", "mmse", "neg_dmmse", "mmse_asym_lo", "mmse_asym_hi", "mmse_alg_lo", "mmse_alg_hi",
               "dmmse_asym_lo", "dmmse_asym_hi", "dmmse_alg_lo", "dmmse_alg_hi", "pass"});
  int bad8 = 0;
  double slack = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double g = 1e-3 * std::pow(4e4, i / 199.0);
    const double m = bpsk_mmse_closed(g), nd = -bpsk_dmmse_closed(g);
    const BpskBoundPairs p = bpsk_bound_pairs(g);
    const bool ok = p.mmse_asymptotic.contains(m, 1e-12) && p.mmse_algebraic.contains(m, 1e-12) &&
                    p.neg_dmmse_asymptotic.contains(nd, 1e-12) && p.neg_dmmse_algebraic.contains(nd, 1e-12);
    if (!ok) ++bad8;
    slack = std::max(slack, (m - p.mmse_algebraic.lower) / m);
    b.row_numbers({g, m, nd, p.mmse_asymptotic.lower, p.mmse_asymptotic.upper, p.mmse_algebraic.lower,
                   p.mmse_algebraic.upper, p.neg_dmmse_asymptotic.lower, p.neg_dmmse_asymptotic.upper,
                   p.neg_dmmse_algebraic.lower, p.neg_dmmse_algebraic.upper, ok ? 1.0 : 0.0});
  }
  run.check(bad8 == 0, "BPSK bound pairs on 200 points of [1e-3, 40]: " + std::to_string(bad8) + " violations");
  run.save("bpsk_pairs.csv", b.str(), {{"max_lower_algebraic_slack", slack}});

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> pick_m(3, 16);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad_lemma = 0;
  for (int i = 0; i < 1000; ++i) {
    const int m = pick_m(rng);
    const double g = std::pow(10.0, -2.0 + 4.0 * u(rng)) / (0.25 * cfg.d * cfg.d);
    const double span = 0.5 * (m - 1) * cfg.d + 2.0 * cfg.d;
    const double y = -span + 2.0 * span * u(rng);
    if (!verify_removal_lemma(m, cfg.d, y, g)) ++bad_lemma;
  }
  run.check(bad_lemma == 0, "removal lemma, 1000 seeded trials: " + std::to_string(bad_lemma) + " violations");

  CsvWriter f({"input", "slope", "reference", "gamma_lo", "gamma_hi", "points"});
  for (const char* n : {"BPSK", "QPSK", "4-PAM", "16-QAM", "8-PSK"}) {
    DecayFit fit = decay_rate_check(make_named(n));
    f.row({n, fmt6(fit.slope), fmt6(fit.reference), fmt6(fit.gamma_lo), fmt6(fit.gamma_hi),
           std::to_string(fit.points)});
    const double tol = std::string(n) == "4-PAM" ? 0.10 : 0.05;
    run.check(std::fabs(fit.slope / fit.reference - 1.0) <= tol,
              std::string(n) + " decay slope " + fmt("%.5f", fit.slope) + " vs " + fmt("%.5f", fit.reference));
  }
  run.save("decay_fits.csv", f.str());
  return run.exit_code();
}

int cmd_tabulate(Run& run) {
  const RunConfig& cfg = run.cfg();
  if (cfg.constellations.empty()) throw std::invalid_argument("tabulate needs --constellation");
  GridSpec g;
  if (!cfg.snr_range.empty()) g.db_lo = cfg.snr_range[0], g.db_hi = cfg.snr_range[1];
  if (cfg.steps > 0) g.count = cfg.steps;
  for (const auto& spec : cfg.constellations) {
    QuadConfig q;
    q.order = cfg.quad_order;
    ScalarChannel ch(std::filesystem::is_regular_file(spec) ? load_constellation_json(spec) : make_named(spec), q);
    ScalarCurve c = tabulate(ch, g);
    c.constellation_ref = spec;
    const std::string p = run.path("curve_" + slug(ch.name()) + ".csv");
    write_curve_csv(c, p, cfg.to_json().dump());
    std::printf("wrote %s\n", p.c_str());
  }
  return 0;
}

int cmd_analyze(Run& run) {
  const RunConfig& cfg = run.cfg();
  if (cfg.constellations.empty()) throw std::invalid_argument("analyze needs --constellation");
  for (const auto& spec : cfg.constellations) {
    if (is_uniform(spec)) {
      UniformStructure s = uniform_structure(25.0, cfg.grid_bits);
      json j = {{"input", "inf-QAM"},
                {"gamma0_low_db", zeta_to_db(s.zeta0_low)},
                {"zeta2_tilde_bits", bits(s.zeta2_tilde)},
                {"gamma2_tilde_db", zeta_to_db(s.zeta2_tilde)},
                {"zeta_m_tilde_bits", bits(s.zeta_m_tilde)},
                {"delta_tilde_bits", bits(s.delta_tilde_nats)},
                {"shaping_offset_bits", bits(s.shaping_offset)}};
      run.save("analysis_inf_QAM.json", j.dump(2) + "\n");
      continue;
    }
    QuadConfig q;
    q.order = cfg.quad_order;
    ScalarChannel ch(std::filesystem::is_regular_file(spec) ? load_constellation_json(spec) : make_named(spec), q);
    LogSnrProfile p;
    ConcavityReport r = analyze_constellation(ch, cfg.grid_bits, &p);
    run.save("analysis_" + slug(ch.name()) + ".json", report_json(r) + "\n",
             {{"grid_points", p.zeta_grid.size()}, {"resolution_bits", p.resolution_bits}});
    CsvWriter w({"zeta_nats", "ilog_bits", "dilog", "ddilog"});
    for (std::size_t i = 0; i < p.zeta_grid.size(); ++i)
      w.row_numbers({p.zeta_grid[i], bits(p.ilog[i]), p.dilog[i], p.ddilog[i]});
    run.save("profile_" + slug(ch.name()) + ".csv", w.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  CLI::App app{"Single-carrier versus OFDM achievable rates over ISI channels"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  RunConfig cfg;

  auto common = [&](CLI::App* s) {
    s->add_option("--out", cfg.out, "Output directory");
    s->add_option("--seed", cfg.seed, "Random seed");
    s->add_option("--reference", cfg.reference, "Reference values file");
  };
  auto input = [&](CLI::App* s) {
    s->add_option("--constellation", cfg.constellations, "Standard name, JSON file, or inf-QAM (repeatable)");
    s->add_option("--quad-order", cfg.quad_order, "Gauss-Hermite order");
  };

  auto* t1 = app.add_subcommand("table1", "Reproduce the concavity table");
  common(t1);
  t1->add_option("--grid-bits", cfg.grid_bits, "Profile resolution in bits");
  t1->add_option("--quad-order", cfg.quad_order, "Gauss-Hermite order");
  t1->add_option("--skip", cfg.skip, "Skip rows whose input name contains this text (repeatable)");

  auto* db = app.add_subcommand("deltabar-curve", "Deltabar of the uniform input versus SNR");
  common(db);
  db->add_option("--snr-range", cfg.snr_range, "LO HI in dB")->expected(2);
  db->add_option("--steps", cfg.steps, "Number of SNR points");

  auto* cc = app.add_subcommand("channel-compare", "I_SL versus I_OFDM over an ISI channel");
  common(cc);
  input(cc);
  cc->add_option("--channel", cfg.channel, "80211n, flat, sharp:<Gamma>, min-diff, or a JSON file");
  cc->add_option("--snr-db", cfg.snr_db, "Single input SNR in dB");
  cc->add_option("--snr-range", cfg.snr_range, "LO HI in dB")->expected(2);
  cc->add_option("--steps", cfg.steps, "Number of SNR points");
  cc->add_option("--grid-bits", cfg.grid_bits, "Profile resolution for min-diff");

  auto* vb = app.add_subcommand("verify-bounds", "Closed-form bound sweeps");
  common(vb);
  vb->add_option("--rho-min", cfg.rho_min, "Lower end of the pointwise sweep in (d/2)^2 gamma");
  vb->add_option("--d", cfg.d, "PAM spacing");

  auto* tb = app.add_subcommand("tabulate", "Mutual information and MMSE curves");
  common(tb);
  input(tb);
  tb->add_option("--snr-range", cfg.snr_range, "LO HI in dB")->expected(2);
  tb->add_option("--steps", cfg.steps, "Number of SNR points");

  auto* an = app.add_subcommand("analyze", "Log-SNR concavity report for one input");
  common(an);
  input(an);
  an->add_option("--grid-bits", cfg.grid_bits, "Profile resolution in bits");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.validate();
    configure_threads();
    Run run(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    if (cfg.command == "table1") rc = cmd_table1(run);
    else if (cfg.command == "deltabar-curve") rc = cmd_deltabar_curve(run);
    else if (cfg.command == "channel-compare") rc = cmd_channel_compare(run);
    else if (cfg.command == "verify-bounds") rc = cmd_verify_bounds(run);
    else if (cfg.command == "tabulate") rc = cmd_tabulate(run);
    else if (cfg.command == "analyze") rc = cmd_analyze(run);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %s in %.1f s\n", cfg.command.c_str(), rc == 0 ? "ok" : "checks failed", dt);
    return rc;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
