#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gen.hpp"
#include "isirate/bounds.hpp"
#include "isirate/scalar_channel.hpp"
#include "oracles.hpp"

using namespace isirate;

namespace {

// Richardson-extrapolated centered difference of I.
double info_slope(const InputModel& m, double g) {
  auto d = [&](double h) { return (m.info(g + h) - m.info(g - h)) / (2.0 * h); };
  const double h = 1e-2 * g;
  return (4.0 * d(0.5 * h) - d(h)) / 3.0;
}

}  // namespace

TEST_SUITE("scalar_channel") {
  TEST_CASE("zero SNR") {
    for (const auto& n : gen::small_names()) {
      ScalarChannel ch(make_named(n));
      ScalarPoint p = ch.evaluate(0.0);
      CHECK(p.mmse == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::fabs(p.info) <= 1e-14);
    }
  }

  TEST_CASE("BPSK against the high-precision oracle") {
    Constellation b = make_named("BPSK");
    CHECK(gen::close_rel(mutual_info(b, 1.0), oracle::kBpskInfo1, 1e-12));
    CHECK(gen::close_rel(mmse(b, 1.0), oracle::kBpskMmse1, 1e-12));
    CHECK(gen::close_rel(mmse_derivative(b, 1.0), oracle::kBpskDmmse1, 1e-12));
    CHECK(gen::close_rel(mmse(b, 0.1), oracle::kBpskMmse0p1, 1e-12));
    CHECK(gen::close_rel(mmse(b, 10.0), oracle::kBpskMmse10, 1e-10));
  }

  TEST_CASE("16-QAM against the high-precision oracle") {
    Constellation q = make_named("16-QAM");
    CHECK(gen::close_rel(mutual_info(q, 10.0), oracle::kQam16Info10, 1e-12));
    CHECK(gen::close_rel(mmse(q, 10.0), oracle::kQam16Mmse10, 1e-11));
    CHECK(gen::close_rel(mmse_derivative(q, 10.0), oracle::kQam16Dmmse10, 1e-10));
    CHECK(gen::close_rel(mutual_info(q, 30.0), oracle::kQam16Info30, 1e-12));
    CHECK(gen::close_rel(mmse(q, 30.0), oracle::kQam16Mmse30, 1e-10));
    CHECK(gen::close_rel(mmse_derivative(q, 30.0), oracle::kQam16Dmmse30, 1e-10));
  }

  TEST_CASE("BPSK quadrature agrees with the closed form") {
    Constellation b = make_named("BPSK");
    for (double g : {0.1, 1.0, 10.0}) {
      CHECK(gen::close_rel(mmse(b, g), bpsk_mmse_closed(g), 1e-10));
      CHECK(gen::close_rel(mmse_derivative(b, g), bpsk_dmmse_closed(g), 1e-10));
    }
  }

  TEST_CASE("QPSK is BPSK at half the SNR") {
    Constellation q = make_named("QPSK"), b = make_named("BPSK");
    for (double g : {0.05, 0.7, 3.0, 12.0, 40.0}) CHECK(gen::close_rel(mmse(q, g), mmse(b, 0.5 * g), 1e-12));
  }

  TEST_CASE("BPSK saturates at one bit") {
    Constellation b = make_named("BPSK");
    CHECK(mutual_info(b, 200.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(std::isfinite(mmse(b, 1e6)));
  }

  TEST_CASE("argument validation") {
    Constellation b = make_named("BPSK");
    CHECK_THROWS_AS(mmse(b, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(mmse(b, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(mmse_derivative(b, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mc_oracle_mmse(b, 1.0, 100, 1), std::invalid_argument);
  }

  TEST_CASE("Gaussian input dominates every constellation") {
    gen::Rng rng(31);
    for (int t = 0; t < 60; ++t) {
      const std::string n = rng.pick(gen::small_names());
      const double g = rng.log_uniform(0.1, 1e3);
      CAPTURE(n);
      CAPTURE(g);
      ScalarChannel ch(make_named(n));
      ScalarPoint p = ch.evaluate(g);
      REQUIRE(p.mmse >= 0.0);
      REQUIRE(p.mmse < 1.0 / (1.0 + g));
      REQUIRE(p.dmmse <= 0.0);
      REQUIRE(p.info <= std::log1p(g) + 1e-12);
      REQUIRE(p.info <= ch.entropy_nats() + 1e-9);
    }
  }

  TEST_CASE("I-MMSE relation on random points") {
    gen::Rng rng(32);
    for (int t = 0; t < 40; ++t) {
      const std::string n = rng.pick(gen::small_names());
      const double g = rng.log_uniform(0.01, 100.0);
      CAPTURE(n);
      CAPTURE(g);
      ScalarChannel ch(make_named(n));
      REQUIRE(gen::close_rel(info_slope(ch, g), ch.evaluate(g).mmse, 1e-5, 1e-8));
    }
  }

  TEST_CASE("separable derivative matches finite differences") {
    for (const char* n : {"BPSK", "QPSK", "4-PAM", "16-QAM", "64-QAM"}) {
      ScalarChannel ch(make_named(n));
      for (double g : {0.1, 0.5, 2.0, 7.0, 30.0}) {
        CAPTURE(n);
        CAPTURE(g);
        CHECK(gen::close_rel(ch.evaluate(g).dmmse, mmse_derivative_fd(ch, g), 1e-5, 1e-12));
      }
    }
  }

  TEST_CASE("2D and separable paths agree") {
    QuadConfig two;
    two.force_2d = true;
    for (const char* n : {"QPSK", "16-QAM"}) {
      ScalarChannel a(make_named(n)), b(make_named(n), two);
      REQUIRE(b.method() == QuadMethod::HERMITE_2D);
      REQUIRE(a.method() == QuadMethod::SEPARABLE_1D);
      for (double g : {0.2, 1.0, 5.0, 20.0, 60.0}) {
        CAPTURE(n);
        CAPTURE(g);
        ScalarPoint p = a.evaluate(g), q = b.evaluate(g);
        CHECK(std::fabs(p.mmse - q.mmse) <= 1e-9);
        CHECK(std::fabs(p.info - q.info) <= 1e-9);
      }
    }
  }

  TEST_CASE("pointwise variance for BPSK") {
    Constellation b = make_named("BPSK");
    gen::Rng rng(33);
    for (int t = 0; t < 200; ++t) {
      const double y = rng.uniform(-3, 3), g = rng.log_uniform(0.01, 20);
      const double th = std::tanh(2.0 * g * y);
      PointwiseStats s = pointwise(b, cplx(y, 0.0), g);
      REQUIRE(s.phi == doctest::Approx(1.0 - th * th).epsilon(1e-12).scale(1.0));
      REQUIRE(std::fabs(s.psi.imag()) <= 1e-15);
    }
  }

  TEST_CASE("pointwise posterior degenerates at high SNR") {
    for (const char* n : {"16-QAM", "8-PSK", "64-QAM"}) {
      Constellation c = make_named(n);
      const double h = 0.5 * min_distance(c);
      const double g = 100.0 / (h * h);
      for (auto x : c.points) REQUIRE(pointwise(c, x, g).phi < 0.03 * h * h);
    }
  }

  TEST_CASE("pointwise variance at a PAM midpoint") {
    for (int m : {2, 4, 8}) {
      const double d = 0.7;
      RealAlphabet a = pam_alphabet(m, d);
      const double mid = 0.5 * (a.levels[0] + a.levels[1]);
      for (double g : {0.5, 5.0, 50.0}) REQUIRE(pointwise_real(a, mid, g) >= 0.25 * d * d * (1.0 - 1e-12));
    }
  }

  TEST_CASE("Monte Carlo oracle") {
    Constellation b = make_named("BPSK"), q = make_named("QPSK");
    McEstimate z = mc_oracle_mmse(b, 0.0, 100000, 3);
    CHECK(std::fabs(z.estimate - 1.0) <= 3.0 * z.std_error + 1e-15);
    McEstimate e = mc_oracle_mmse(q, 4.0, 1000000, 7);
    CHECK(std::fabs(e.estimate - mmse(q, 4.0)) <= 4.0 * e.std_error);
    McEstimate e2 = mc_oracle_mmse(q, 4.0, 1000000, 7);
    CHECK(e.estimate == e2.estimate);
    CHECK(e.std_error == e2.std_error);
  }

  TEST_CASE("16-QAM at 10 agrees with a large Monte Carlo run") {
    Constellation q = make_named("16-QAM");
    McEstimate e = mc_oracle_mmse(q, 10.0, 2000000, 99);
    CHECK(std::fabs(e.estimate - oracle::kQam16Mmse10) <= 3.0 * e.std_error);
  }

  TEST_CASE("tabulated curves satisfy the curve invariants") {
    ScalarChannel b(make_named("BPSK"));
    ScalarCurve c = tabulate(b, {-20.0, 20.0, 200});
    REQUIRE(c.gamma_grid.size() == 200);
    for (std::size_t i = 0; i < 200; ++i) {
      const double g = c.gamma_grid[i];
      if (i) REQUIRE(c.info_nats[i] >= c.info_nats[i - 1]);
      REQUIRE(c.mmse[i] >= 0.0);
      REQUIRE(c.mmse[i] <= 1.0 / (1.0 + g) + 1e-9);
      REQUIRE(c.dmmse[i] <= 0.0);
      REQUIRE(c.info_nats[i] <= std::log(2.0) + 1e-9);
    }
    ScalarChannel q64(make_named("64-QAM"));
    ScalarCurve s = tabulate(q64, {0.0, 40.0, 5});
    CHECK(std::fabs(nats_to_bits(s.info_nats.back()) - 6.0) <= 1e-3);
    ScalarCurve one = tabulate(b, {3.0, 3.0, 1});
    CHECK(one.gamma_grid.size() == 1);
    CHECK(one.gamma_grid[0] == doctest::Approx(db_to_lin(3.0)));
  }

  TEST_CASE("non-separable derivative diagnostics") {
    ScalarChannel p(make_named("8-PSK"));
    REQUIRE(p.method() == QuadMethod::HERMITE_2D);
    for (double g : {0.5, 3.0, 12.0}) {
      Derivative2D d = p.derivative_terms(g);
      const double fd = mmse_derivative_fd(p, g);
      CAPTURE(g);
      // The squared-variance form matches the derivative; the linear form does not.
      CHECK(gen::close_rel(-(d.e_phi2 + d.e_psi2), fd, 1e-5, 1e-12));
      CHECK(!gen::close_rel(-(d.e_phi + d.e_psi2), fd, 1e-3));
    }
  }
}
