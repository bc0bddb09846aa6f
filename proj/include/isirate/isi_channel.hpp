#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "isirate/input_model.hpp"
#include "isirate/logsnr.hpp"

namespace isirate {

using cplx = std::complex<double>;

// |H(theta)|^2 = gain_sq on [theta_lo, theta_hi]; zero where no segment applies.
struct Segment {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  double gain_sq = 0.0;
};

// Either a tap-domain channel H(theta) = sum h_k e^{-j k theta} or a
// piecewise-constant transfer on (-pi, pi].
class IsiChannel {
 public:
  static IsiChannel from_taps(std::vector<cplx> taps);
  static IsiChannel from_segments(std::vector<Segment> segments);

  bool is_piecewise() const { return piecewise_; }
  const std::vector<cplx>& taps() const { return taps_; }
  const std::vector<Segment>& segments() const { return segments_; }

  double transfer(double theta) const;
  // (1/2pi) int |H|^2 = sum |h_k|^2 for taps.
  double input_snr() const;
  double max_gain() const;
  double min_gain() const;
  // Same shape with input SNR rescaled to target.
  IsiChannel scaled_to(double target_snr) const;

 private:
  bool piecewise_ = false;
  std::vector<cplx> taps_;
  std::vector<Segment> segments_;
};

IsiChannel channel_80211n();
IsiChannel channel_from_json_text(const std::string& text);
IsiChannel load_channel_json(const std::string& path);
// Built-in name ("80211n", "flat") or a JSON file path.
IsiChannel resolve_channel(const std::string& spec);

// Random channel: L uniform on [1, max_taps], i.i.d. CN(0,1) taps, scaled to
// an input SNR drawn uniformly in dB from [snr_db_lo, snr_db_hi].
IsiChannel random_channel(std::uint64_t seed, int max_taps, double snr_db_lo, double snr_db_hi);

struct ThetaIntegral {
  double value = 0.0;
  int points = 0;
};

// (1/2pi) int f(theta) over the period by the trapezoid rule, doubling from
// n_start until the relative change is below 1e-10.
ThetaIntegral snr_mmse_dfe_u_detail(const IsiChannel& ch, int n_start = 256);
double snr_mmse_dfe_u(const IsiChannel& ch, int n_start = 256);

// Rates in nats.
double rate_sl(const InputModel& x, const IsiChannel& ch);
ThetaIntegral rate_ofdm_detail(const InputModel& x, const IsiChannel& ch, int n_start = 256);
double rate_ofdm(const InputModel& x, const IsiChannel& ch, int n_start = 256);
// Single-threaded reference of rate_ofdm.
double rate_ofdm_serial(const InputModel& x, const IsiChannel& ch, int n_start = 256);

enum class ExtremalKind { MIN_DIFF, SHARP };
// MIN_DIFF uses the single largest bridge of the report; SHARP uses gamma_param.
IsiChannel extremal_channel(ExtremalKind kind, const ConcavityReport* report, double gamma_param);

// Uncoded symbol error probability of unit-power square QAM of the given
// order (side^2 points) at SNR gamma, with q = Q(sqrt((d_min/2)^2 gamma)).
double subcarrier_ser(int qam_order, double gamma);

struct RateComparison {
  double input_snr_db = 0.0;
  double snr_dfe = 0.0;
  double i_sl_bits = 0.0;
  double i_ofdm_bits = 0.0;
  double diff_bits = 0.0;
};
RateComparison compare_rates(const InputModel& x, const IsiChannel& ch);
std::vector<RateComparison> sweep_compare(const InputModel& x, const IsiChannel& ch, double snr_db_lo,
                                          double snr_db_hi, int steps);
void write_sweep_csv(const std::vector<RateComparison>& rows, const std::string& path);

// Input SNR (dB) at which rate(scaled channel) reaches target_bits, for SC
// (sl = true) or OFDM. Bisection on [db_lo, db_hi]; NaN if not bracketed.
double required_snr_db(const InputModel& x, const IsiChannel& ch, double target_bits, bool sl, double db_lo,
                       double db_hi, double tol_db = 1e-4);

// log(1 + |H(theta)|^2) sampled on n points of (-pi, pi].
std::vector<std::pair<double, double>> log_snr_samples(const IsiChannel& ch, int n);

}  // namespace isirate
