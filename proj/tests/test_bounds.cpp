#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gen.hpp"
#include "isirate/bounds.hpp"
#include "isirate/scalar_channel.hpp"
#include "oracles.hpp"

using namespace isirate;

TEST_SUITE("bounds") {
  TEST_CASE("bound functions are non-negative with converged series") {
    gen::Rng rng(51);
    for (int t = 0; t < 300; ++t) {
      const double rho = rng.log_uniform(0.1, 60.0);
      CAPTURE(rho);
      REQUIRE(b_up(rho) >= 0.0);
      REQUIRE(b_low(rho) >= 0.0);
      REQUIRE(c_up(rho) >= 0.0);
      REQUIRE(c_low(rho) >= 0.0);
      REQUIRE(d_up(rho) >= 0.0);
      REQUIRE(d_up(rho) <= d_up_majorant(rho) * (1.0 + 1e-12));
      const SeriesValue b = b_up_series(rho), d = d_up_series(rho);
      REQUIRE(b.tail_bound < 1e-14);
      REQUIRE(d.tail_bound < 1e-14);
    }
  }

  TEST_CASE("series length adapts to rho") {
    CHECK(b_up_series(0.1).terms > 5);
    CHECK(b_up_series(4.0).terms < 10);
  }

  TEST_CASE("D-bar is strictly decreasing") {
    double prev = d_up(0.05);
    for (int i = 1; i <= 200; ++i) {
      const double rho = 0.05 * std::pow(800.0, i / 200.0);
      const double v = d_up(rho);
      REQUIRE(v < prev);
      prev = v;
    }
  }

  TEST_CASE("C-bar stays finite far out") {
    for (double rho : {45.0, 80.0, 150.0}) {
      CHECK(std::isfinite(c_up(rho)));
      CHECK(std::isfinite(c_low(rho)));
    }
  }

  TEST_CASE("invalid rho rejected") {
    CHECK_THROWS_AS(b_up(0.0), std::invalid_argument);
    CHECK_THROWS_AS(d_up(-1.0), std::invalid_argument);
  }

  TEST_CASE("BPSK closed forms against the oracle") {
    CHECK(bpsk_mmse_closed(0.0) == 1.0);
    CHECK(bpsk_dmmse_closed(0.0) == -2.0);
    CHECK(gen::close_rel(bpsk_mmse_closed(0.1), oracle::kBpskMmse0p1, 1e-13));
    CHECK(gen::close_rel(bpsk_mmse_closed(1.0), oracle::kBpskMmse1, 1e-13));
    CHECK(gen::close_rel(bpsk_mmse_closed(10.0), oracle::kBpskMmse10, 1e-12));
    CHECK(gen::close_rel(bpsk_dmmse_closed(1.0), oracle::kBpskDmmse1, 1e-13));
    CHECK(bpsk_dmmse_closed(1e-6) == doctest::Approx(-2.0).epsilon(1e-5));
  }

  TEST_CASE("BPSK bound pair examples") {
    const double m4 = bpsk_mmse_closed(4.0);
    CHECK(m4 >= std::exp(-4.0) / 3.0);
    CHECK(m4 <= std::exp(-4.0));
    const BpskBoundPairs p10 = bpsk_bound_pairs(10.0);
    const double a = 0.5 * std::sqrt(M_PI) * std::exp(-10.0) / std::sqrt(10.0);
    CHECK(p10.mmse_asymptotic.upper == doctest::Approx(a).epsilon(1e-14));
    CHECK(p10.mmse_asymptotic.lower == doctest::Approx((1.0 - M_PI * M_PI / 160.0) * a).epsilon(1e-14));
    CHECK(p10.mmse_asymptotic.contains(bpsk_mmse_closed(10.0)));
    const BpskBoundPairs p05 = bpsk_bound_pairs(0.5);
    CHECK(p05.mmse_algebraic.lower == doctest::Approx(std::exp(-0.5) / std::sqrt(2.0)));
    CHECK(p05.mmse_algebraic.contains(bpsk_mmse_closed(0.5)));
  }

  TEST_CASE("BPSK bound pairs hold on [1e-3, 40]") {
    double slack = 0.0;
    for (int i = 0; i < 200; ++i) {
      const double g = 1e-3 * std::pow(4e4, i / 199.0);
      CAPTURE(g);
      const double m = bpsk_mmse_closed(g), nd = -bpsk_dmmse_closed(g);
      const BpskBoundPairs p = bpsk_bound_pairs(g);
      REQUIRE(p.mmse_asymptotic.contains(m, 1e-12));
      REQUIRE(p.mmse_algebraic.contains(m, 1e-12));
      REQUIRE(p.neg_dmmse_asymptotic.contains(nd, 1e-12));
      REQUIRE(p.neg_dmmse_algebraic.contains(nd, 1e-12));
      slack = std::max(slack, m - p.mmse_algebraic.lower);
    }
    CHECK(slack <= 0.022);
  }

  TEST_CASE("pointwise bracket for 4-PAM at rho = 1") {
    const double d = 2.0 / std::sqrt(5.0);
    const double g = 1.0 / (0.25 * d * d);
    RealAlphabet a = pam_alphabet(4, d);
    for (int k = 0; k < 200; ++k) {
      const double y = -2.5 * d + 5.0 * d * k / 199.0;
      const Bracket b = pam_pointwise_bracket(4, d, y, g);
      REQUIRE(b.contains(pointwise_real(a, y, g), 1e-12, 1e-15));
    }
  }

  TEST_CASE("two-point alphabet meets the lower end exactly") {
    const double d = 1.3, g = 2.0;
    RealAlphabet a = pam_alphabet(2, d);
    gen::Rng rng(52);
    for (int k = 0; k < 100; ++k) {
      const double y = rng.uniform(-2.0, 2.0);
      const Bracket b = pam_pointwise_bracket(2, d, y, g);
      REQUIRE(b.lower == doctest::Approx(pointwise_real(a, y, g)).epsilon(1e-12).scale(1e-3));
      REQUIRE(b.upper - b.lower == doctest::Approx(0.25 * d * d * d_up(0.25 * d * d * g)).epsilon(1e-12));
    }
  }

  TEST_CASE("pointwise bracket vanishes far from the alphabet") {
    const Bracket b = pam_pointwise_bracket(8, 1.0, 200.0, 3.0);
    CHECK(b.lower < 1e-100);
    const double h = 0.25;
    CHECK(b.upper - b.lower == doctest::Approx(h * d_up(h * 3.0)));
  }

  TEST_CASE("removal lemma examples") {
    CHECK(verify_removal_lemma(3, 1.0, 0.0, 1.0));
    CHECK(verify_removal_lemma(16, 1.0, 12.0, 10.0));
    gen::Rng rng(53);
    for (int t = 0; t < 500; ++t) {
      const double y = rng.uniform(-6.0, 6.0), g = rng.log_uniform(0.01, 100.0);
      REQUIRE(verify_removal_lemma(8, 1.0, y, g));
    }
  }

  TEST_CASE("removal lemma on 1000 random trials") {
    gen::Rng rng(54);
    for (int t = 0; t < 1000; ++t) {
      const int m = rng.integer(3, 16);
      const double d = rng.log_uniform(0.1, 4.0);
      const double span = 0.5 * (m - 1) * d + 2.0 * d;
      const double y = rng.uniform(-span, span), g = rng.log_uniform(0.01, 100.0) / (0.25 * d * d);
      CAPTURE(m);
      CAPTURE(y);
      CAPTURE(g);
      REQUIRE(verify_removal_lemma(m, d, y, g));
    }
  }

  TEST_CASE("M = 2 brackets reduce to BPSK") {
    for (double g : {0.5, 2.0, 8.0}) {
      const Bracket b = pam_mmse_bracket(2, 2.0, g);
      const double base = bpsk_mmse_closed(g);
      CHECK(b.lower == doctest::Approx(base - b_low(g)).epsilon(1e-14));
      CHECK(b.upper == doctest::Approx(base + b_up(g)).epsilon(1e-14));
      CHECK(b.contains(pam_mmse(2, 2.0, g), 1e-12));
    }
  }

  TEST_CASE("bracket is tight at rho = 4") {
    const double m = bpsk_mmse_closed(4.0);
    CHECK((b_up(4.0) + b_low(4.0)) / m < 0.05);
  }

  TEST_CASE("PAM brackets contain the quadrature values") {
    BoundSweep s = verify_pam_brackets({3, 4, 5, 8, 16}, 1.0, 0.5, 16.0, 40, 100);
    CHECK(s.rows.size() == 5 * 40 * 102);
    int bad = 0;
    for (const auto& r : s.rows) bad += !r.pass;
    CHECK(bad == 0);
    CHECK(s.all_pass());
  }

  TEST_CASE("mmse and derivative brackets for every M up to 16") {
    std::vector<int> sizes;
    for (int m = 2; m <= 16; ++m) sizes.push_back(m);
    BoundSweep s = verify_pam_brackets(sizes, 0.8, 0.5, 16.0, 40, 0);
    CHECK(s.all_pass());
  }

  TEST_CASE("pointwise bracket holds below rho = 0.5") {
    BoundSweep s = verify_pam_brackets({3, 4, 8}, 1.0, 0.1, 0.5, 10, 50);
    int bad = 0;
    for (std::size_t i = 0; i < s.rows.size(); ++i)
      if (std::string(s.quantity[i]) == "pointwise") bad += !s.rows[i].pass;
    CHECK(bad == 0);
  }

  TEST_CASE("4-PAM derivative lies in its bracket at rho = 2") {
    const double d = 2.0 / std::sqrt(5.0);
    const double g = 2.0 / (0.25 * d * d);
    CHECK(pam_dmmse_bracket(4, d, g).contains(pam_dmmse(4, d, g), 1e-10));
  }

  TEST_CASE("sweep parameters validated") {
    CHECK_THROWS_AS(verify_pam_brackets({4}, 1.0, 0.0, 16.0, 10, 10), std::invalid_argument);
    CHECK_THROWS_AS(pam_alphabet(4, 0.0), std::invalid_argument);
  }

  TEST_CASE("decay rate fits") {
    struct Case {
      const char* name;
      double tol;
    };
    for (Case c : {Case{"BPSK", 0.05}, Case{"QPSK", 0.05}, Case{"4-PAM", 0.10}, Case{"16-QAM", 0.05},
                   Case{"8-PSK", 0.05}}) {
      CAPTURE(c.name);
      DecayFit f = decay_rate_check(make_named(c.name));
      CHECK(std::fabs(f.slope / f.reference - 1.0) <= c.tol);
      CHECK(!f.range_shrunk);
    }
    CHECK(decay_rate_check(make_named("BPSK")).reference == doctest::Approx(-1.0));
    CHECK(decay_rate_check(make_named("QPSK")).reference == doctest::Approx(-0.5));
  }
}
