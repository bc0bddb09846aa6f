#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "isirate/quadrature.hpp"
#include "isirate/special.hpp"
#include "oracles.hpp"

using namespace isirate;

TEST_SUITE("special") {
  TEST_CASE("q_function reference points") {
    CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gen::close_rel(q_function(1.0), oracle::kQ1, 1e-13));
    CHECK(gen::close_rel(q_function(-1.0), 1.0 - oracle::kQ1, 1e-13));
  }

  TEST_CASE("q_function matches erfc over [-8, 26]") {
    gen::Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.uniform(-8.0, 26.0);
      const double ref = 0.5 * std::erfc(x / std::sqrt(2.0));
      REQUIRE(gen::close_rel(q_function(x), ref, 1e-12));
    }
  }

  TEST_CASE("classical tail bound holds") {
    gen::Rng rng(12);
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.log_uniform(1e-3, 40.0);
      REQUIRE(q_function(x) <= std::exp(-0.5 * x * x) / (std::sqrt(2.0 * M_PI) * x));
    }
  }

  TEST_CASE("scaled and log forms agree with Q") {
    gen::Rng rng(13);
    for (int i = 0; i < 500; ++i) {
      const double x = rng.uniform(0.0, 30.0);
      REQUIRE(gen::close_rel(q_scaled(x) * std::exp(-0.5 * x * x), q_function(x), 1e-12, 1e-300));
      REQUIRE(gen::close_rel(log_q(x), std::log(q_function(x)), 1e-12));
    }
    CHECK(std::isfinite(log_q(60.0)));
    CHECK(log_q(60.0) < -1800.0);
  }

  TEST_CASE("q_diff avoids cancellation in the far tail") {
    const double a = 30.0, b = 30.5;
    const double ref = q_function(a) - q_function(b);
    CHECK(gen::close_rel(q_diff(a, b), ref, 1e-12));
    CHECK(q_diff(36.0, 37.0) > 0.0);
    CHECK(gen::close_rel(q_diff(36.0, 37.0), q_function(36.0), 1e-10));
    CHECK(gen::close_rel(q_diff(-1.0, 1.0), 1.0 - 2.0 * oracle::kQ1, 1e-13));
  }

  TEST_CASE("erfcx is finite for large arguments") {
    CHECK(std::isfinite(erfcx(1e3)));
    CHECK(gen::close_rel(erfcx(1e3) * 1e3 * std::sqrt(M_PI), 1.0, 1e-6));
    CHECK(gen::close_rel(erfcx(0.5), std::exp(0.25) * std::erfc(0.5), 1e-14));
  }
}

TEST_SUITE("quadrature") {
  TEST_CASE("Gauss-Hermite rule integrates Gaussian moments") {
    for (int n : {8, 32, 96, 200}) {
      const GaussRule& r = gauss_hermite(n);
      double w = 0.0, m2 = 0.0, m4 = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        const double t = r.nodes[i];
        w += r.weights[i];
        m2 += r.weights[i] * t * t;
        m4 += r.weights[i] * t * t * t * t;
      }
      CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
      CHECK(m2 == doctest::Approx(0.5).epsilon(1e-13));
      CHECK(m4 == doctest::Approx(0.75).epsilon(1e-12));
    }
  }

  TEST_CASE("Gauss-Legendre rule is exact for low-degree polynomials") {
    const GaussRule& r = gauss_legendre(16);
    for (int k = 0; k <= 31; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      REQUIRE(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }

  TEST_CASE("panels map onto the requested interval") {
    GaussRule r;
    append_panel(r, 1.0, 3.0, 8);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * r.nodes[i] * r.nodes[i];
    CHECK(s == doctest::Approx(26.0 / 3.0).epsilon(1e-14));
    GaussRule g;
    append_gaussian_panel(g, -8.0, 8.0, 64);
    double w = 0.0;
    for (double x : g.weights) w += x;
    CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
  }
}
