#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "isirate/uniform_input.hpp"
#include "oracles.hpp"

using namespace isirate;

namespace {

const double kLn2 = std::log(2.0);

const UniformStructure& structure() {
  static const UniformStructure s = uniform_structure();
  return s;
}

}  // namespace

TEST_SUITE("uniform") {
  TEST_CASE("low-SNR limit and estimator bound") {
    CHECK(uniform_mmse(1e-9) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(uniform_info(0.0) == 0.0);
    gen::Rng rng(61);
    for (int i = 0; i < 100; ++i) {
      const double g = rng.log_uniform(1e-3, 1e6);
      REQUIRE(uniform_mmse(g) < 1.0 / g);
      REQUIRE(uniform_mmse(g) < 1.0 / (1.0 + g));
      REQUIRE(uniform_dmmse(g) < 0.0);
    }
  }

  TEST_CASE("g-form and variance form agree across the switch") {
    for (int i = 0; i <= 40; ++i) {
      const double g = 0.4 + 0.2 * i / 40.0;
      REQUIRE(std::fabs(uniform_component_mmse_gform(g) - uniform_component_mmse_variance_form(g)) <= 1e-7);
    }
  }

  TEST_CASE("mutual information against the entropy oracle") {
    CHECK(gen::close_rel(uniform_info(1.0), oracle::kUniformInfo1, 1e-9));
    CHECK(gen::close_rel(uniform_info(1e3), oracle::kUniformInfo1e3, 1e-9));
    CHECK(gen::close_rel(uniform_info(1e4), oracle::kUniformInfo1e4, 1e-9));
  }

  TEST_CASE("high-SNR law") {
    // The deviation shrinks like 1/sqrt(gamma); at 1e4 it is still about 1e-2 nats.
    const double law6 = std::log(1e6) - shaping_offset();
    CHECK(std::fabs(uniform_info(1e6) - law6) <= 5e-3);
    const double dev4 = std::fabs(uniform_info(1e4) - (std::log(1e4) - shaping_offset()));
    const double dev6 = std::fabs(uniform_info(1e6) - law6);
    CHECK(dev6 < 0.2 * dev4);
    CHECK(shaping_offset() / kLn2 == doctest::Approx(0.509229).epsilon(1e-5));
  }

  TEST_CASE("information is increasing") {
    gen::Rng rng(62);
    for (int i = 0; i < 100; ++i) {
      const double g = rng.log_uniform(1e-3, 1e6);
      REQUIRE(uniform_info(2.0 * g) > uniform_info(g));
    }
  }

  TEST_CASE("I-MMSE relation over [0.01, 1e3]") {
    for (int i = 0; i <= 25; ++i) {
      const double g = 0.01 * std::pow(1e5, i / 25.0);
      auto d = [&](double h) { return (uniform_info(g + h) - uniform_info(g - h)) / (2.0 * h); };
      const double h = 1e-2 * g;
      const double fd = (4.0 * d(0.5 * h) - d(h)) / 3.0;
      CAPTURE(g);
      REQUIRE(gen::close_rel(fd, uniform_mmse(g), 1e-5));
    }
  }

  TEST_CASE("derivative matches finite differences of the mmse") {
    for (double g : {0.05, 0.45, 0.55, 3.0, 40.0, 500.0}) {
      const double h = 1e-3 * g;
      const double fd = (uniform_mmse(g + h) - uniform_mmse(g - h)) / (2.0 * h);
      CAPTURE(g);
      CHECK(gen::close_rel(uniform_dmmse(g), fd, 1e-5));
    }
  }

  TEST_CASE("Monte Carlo agreement at gamma = 10") {
    McEstimate e = mc_uniform_mmse(10.0, 1000000, 5);
    CHECK(std::fabs(e.estimate - uniform_mmse(10.0)) <= 4.0 * e.std_error);
  }

  TEST_CASE("concavity structure") {
    const UniformStructure& s = structure();
    CHECK(std::fabs(zeta_to_db(s.zeta0_low) - 8.76) <= 0.05);
    CHECK(std::fabs(s.zeta2_tilde / kLn2 - 5.52) <= 0.02);
    CHECK(std::fabs(zeta_to_db(s.zeta2_tilde) - 16.5) <= 0.05);
    CHECK(std::fabs(s.delta_tilde_nats / kLn2 - 0.0608) <= 0.001);
    CHECK(std::fabs(s.zeta_m_tilde / kLn2 - 1.70) <= 0.02);
    CHECK(s.thresholds.crossings.size() == 1);
    CHECK(std::isinf(s.thresholds.zeta0_high));
  }

  TEST_CASE("profile invariants") {
    const UniformStructure& s = structure();
    const auto& p = s.profile;
    double prev = -1.0;
    for (std::size_t i = 0; i < p.zeta_grid.size(); ++i) {
      const double z = p.zeta_grid[i];
      REQUIRE(p.ilog[i] <= z + 1e-12);
      const double gap = z - p.ilog[i];
      REQUIRE(gap >= prev - 1e-12);
      prev = gap;
      if (z > 0.0 && z < s.zeta0_low - 0.01) REQUIRE(p.ddilog[i] < 0.0);
      if (z > s.zeta0_low + 0.01 && z < 20.0) REQUIRE(p.ddilog[i] > 0.0);
      // convex envelope: line through the origin up to the tangent point
      const double env = z <= s.zeta2_tilde ? s.tilde_slope * z : p.ilog[i];
      REQUIRE(env <= p.ilog[i] + 1e-12);
    }
    CHECK(std::fabs(prev - s.shaping_offset) <= 2e-3);
  }

  TEST_CASE("deltabar values") {
    CHECK(std::fabs(deltabar(db_to_lin(30.0)).value_nats / kLn2 - 0.0841) <= 0.002);
    CHECK(std::fabs(deltabar(db_to_lin(60.0)).value_nats / kLn2 - 0.228) <= 0.003);
    CHECK(deltabar(db_to_lin(8.0)).value_nats == 0.0);
    CHECK(deltabar(db_to_lin(zeta_to_db(uniform_zeta0_low()) - 1e-3)).value_nats == 0.0);
    const double d100 = deltabar(db_to_lin(100.0)).value_nats;
    CHECK(d100 < shaping_offset());
    CHECK(d100 > deltabar(db_to_lin(60.0)).value_nats);
  }

  TEST_CASE("deltabar is non-decreasing on a 40-point grid") {
    std::vector<double> db;
    for (int i = 0; i < 40; ++i) db.push_back(5.0 + 95.0 * i / 39.0);
    std::vector<DeltaBar> c = deltabar_curve(db);
    for (std::size_t i = 1; i < c.size(); ++i) REQUIRE(c[i].value_nats >= c[i - 1].value_nats - 1e-12);
  }

  TEST_CASE("convexity certificate constants") {
    ConvexityCertificate c = convexity_certificate(1.5, 200.0);
    CHECK(std::fabs(c.c1 - 2.26) <= 0.01);
    CHECK(std::fabs(c.c2 - 10.6) <= 0.05);
    CHECK(c.threshold_gamma <= 25.0);
    CHECK(c.threshold_gamma > 1.5);
    CHECK(convexity_condition(c, c.k, 30.0) > 0.0);
  }

  TEST_CASE("input model wrapper") {
    UniformInput u;
    ScalarPoint p = u.evaluate(3.0);
    CHECK(p.mmse == uniform_mmse(3.0));
    CHECK(p.info == uniform_info(3.0));
    CHECK(std::isinf(u.entropy_nats()));
  }
}
