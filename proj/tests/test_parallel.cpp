#include <doctest.h>

#include <omp.h>

#include <cstdlib>

#include "isirate/isi_channel.hpp"
#include "isirate/logsnr.hpp"
#include "isirate/parallel.hpp"
#include "isirate/scalar_channel.hpp"

using namespace isirate;

namespace {

// Runs the parallel kernels with several threads even on a single core.
struct ManyThreads {
  int saved = omp_get_max_threads();
  ManyThreads() { omp_set_num_threads(4); }
  ~ManyThreads() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_SUITE("parallel") {
  TEST_CASE("thread cap from the environment") {
    setenv("ISIRL_THREADS", "1", 1);
    CHECK(configure_threads() == 1);
    CHECK(thread_count() == 1);
    unsetenv("ISIRL_THREADS");
    CHECK(configure_threads() >= 1);
  }

  TEST_CASE_FIXTURE(ManyThreads, "tabulate matches its serial reference") {
    CHECK(thread_count() == 4);
    for (const char* n : {"16-QAM", "8-PSK"}) {
      ScalarChannel ch(make_named(n));
      GridSpec g{-10.0, 30.0, 41};
      ScalarCurve a = tabulate(ch, g), b = tabulate_serial(ch, g);
      CHECK(a.info_nats == b.info_nats);
      CHECK(a.mmse == b.mmse);
      CHECK(a.dmmse == b.dmmse);
    }
  }

  TEST_CASE_FIXTURE(ManyThreads, "profile matches its serial reference") {
    CHECK(thread_count() == 4);
    ScalarChannel ch(make_named("64-QAM"));
    ProfileOptions o;
    o.resolution_bits = 5e-3;
    LogSnrProfile a = build_profile(ch, o), b = build_profile_serial(ch, o);
    CHECK(a.zeta_grid == b.zeta_grid);
    CHECK(a.ilog == b.ilog);
    CHECK(a.ddilog == b.ddilog);
    CHECK(a.zeta_max == b.zeta_max);
  }

  TEST_CASE_FIXTURE(ManyThreads, "OFDM rate matches its serial reference") {
    CHECK(thread_count() == 4);
    ScalarChannel ch(make_named("16-QAM"));
    for (std::uint64_t s : {1u, 2u, 3u}) {
      IsiChannel c = random_channel(s, 12, 0.0, 30.0);
      const double a = rate_ofdm(ch, c), b = rate_ofdm_serial(ch, c);
      CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
  }
}
