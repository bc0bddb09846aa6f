#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "gen.hpp"
#include "isirate/constellation.hpp"

using namespace isirate;

namespace {

void check_normalized(const Constellation& c) {
  double ps = 0.0, p2 = 0.0;
  cplx mean = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    REQUIRE(c.probs[i] >= 0.0);
    ps += c.probs[i];
    mean += c.probs[i] * c.points[i];
    p2 += c.probs[i] * std::norm(c.points[i]);
  }
  REQUIRE(std::fabs(ps - 1.0) <= 1e-12);
  REQUIRE(std::abs(mean) < 1e-12);
  REQUIRE(std::fabs(p2 - 1.0) <= 1e-12);
  REQUIRE(min_distance(c) > 0.0);
}

double half_dmin_sq_db(const Constellation& c) {
  const double h = 0.5 * min_distance(c);
  return 10.0 * std::log10(h * h);
}

}  // namespace

TEST_SUITE("constellation") {
  TEST_CASE("BPSK is the antipodal pair") {
    Constellation c = make_standard(Family::BPSK, 2);
    REQUIRE(c.size() == 2);
    std::set<double> re{c.points[0].real(), c.points[1].real()};
    CHECK(re == std::set<double>{-1.0, 1.0});
    CHECK(c.probs[0] == 0.5);
    CHECK(c.is_separable);
    CHECK(min_distance(c) == doctest::Approx(2.0));
    CHECK(entropy_bits(c) == doctest::Approx(1.0));
  }

  TEST_CASE("4-PAM levels are odd multiples of 1/sqrt(5)") {
    Constellation c = make_standard(Family::PAM, 4);
    std::set<long> scaled;
    for (auto p : c.points) {
      CHECK(p.imag() == 0.0);
      scaled.insert(std::lround(p.real() * std::sqrt(5.0)));
      CHECK(std::fabs(p.real() * std::sqrt(5.0) - std::round(p.real() * std::sqrt(5.0))) < 1e-14);
    }
    CHECK(scaled == std::set<long>{-3, -1, 1, 3});
  }

  TEST_CASE("square QAM minimum distances match the table column") {
    CHECK(std::fabs(half_dmin_sq_db(make_named("64-QAM")) + 16.2) <= 0.05);
    CHECK(std::fabs(half_dmin_sq_db(make_named("256-QAM")) + 22.3) <= 0.05);
    CHECK(std::fabs(half_dmin_sq_db(make_named("1024-QAM")) + 28.3) <= 0.05);
    CHECK(std::fabs(half_dmin_sq_db(make_named("4096-QAM")) + 34.4) <= 0.05);
    CHECK(entropy_bits(make_named("256-QAM")) == doctest::Approx(8.0).epsilon(1e-14));
  }

  TEST_CASE("skewed binary entropy") {
    Constellation c = make_custom("skew", {cplx(-1, 0), cplx(1, 0)}, {0.25, 0.75});
    CHECK(entropy_bits(c) == doctest::Approx(0.811278124459133).epsilon(1e-13));
    check_normalized(c);
  }

  TEST_CASE("invalid orders are rejected") {
    CHECK_THROWS_AS(make_standard(Family::PSK, 6), std::invalid_argument);
    CHECK_THROWS_AS(make_standard(Family::SQUARE_QAM, 8), std::invalid_argument);
    CHECK_THROWS_AS(make_standard(Family::BPSK, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_standard(Family::PAM, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_named("17-QAM"), std::invalid_argument);
    CHECK_THROWS_AS(make_named("banana"), std::invalid_argument);
  }

  TEST_CASE("custom constellations are validated") {
    CHECK_THROWS_AS(make_custom("dup", {cplx(1, 0), cplx(1, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(make_custom("neg", {cplx(1, 0), cplx(-1, 0)}, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_custom("one", {cplx(1, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(make_custom("len", {cplx(1, 0), cplx(-1, 0)}, {1.0}), std::invalid_argument);
  }

  TEST_CASE("every shipped constellation is normalized") {
    for (const auto& n : gen::shipped_names()) {
      CAPTURE(n);
      check_normalized(make_named(n));
    }
  }

  TEST_CASE("construction is deterministic") {
    for (const auto& n : gen::shipped_names()) {
      Constellation a = make_named(n), b = make_named(n);
      REQUIRE(a.points == b.points);
      REQUIRE(a.probs == b.probs);
    }
  }

  TEST_CASE("square QAM is the product of two scaled PAM sets") {
    for (int m : {2, 4, 8, 16}) {
      Constellation q = make_standard(Family::SQUARE_QAM, m * m);
      Constellation p = make_standard(Family::PAM, m);
      REQUIRE(q.is_separable);
      std::set<std::pair<long long, long long>> got, want;
      auto key = [](double x) { return std::llround(x * 1e12); };
      for (auto z : q.points) got.insert({key(z.real()), key(z.imag())});
      for (auto a : p.points)
        for (auto b : p.points) want.insert({key(a.real() / std::sqrt(2.0)), key(b.real() / std::sqrt(2.0))});
      CHECK(got == want);
    }
  }

  TEST_CASE("normalization is idempotent on random inputs") {
    gen::Rng rng(21);
    for (int t = 0; t < 200; ++t) {
      const int n = rng.integer(2, 24);
      std::vector<cplx> pts;
      std::vector<double> pr;
      for (int i = 0; i < n; ++i) {
        pts.push_back(cplx(rng.uniform(-5, 5), rng.uniform(-5, 5)));
        pr.push_back(rng.uniform(0.05, 1.0));
      }
      Constellation c = make_custom("r", pts, pr);
      check_normalized(c);
      Constellation d = make_custom("r", c.points, c.probs);
      for (std::size_t i = 0; i < c.size(); ++i) REQUIRE(std::abs(c.points[i] - d.points[i]) <= 1e-14);
    }
  }

  TEST_CASE("JSON loader normalizes and applies probabilities") {
    Constellation c = constellation_from_json_text(
        R"({"name": "skew", "points": [[0, 0], [2, 0]], "probs": [0.75, 0.25]})");
    CHECK(c.name == "skew");
    check_normalized(c);
    CHECK(entropy_bits(c) == doctest::Approx(0.811278124459133));
    Constellation e = constellation_from_json_text(R"({"points": [[1, 1], [-1, -1], [1, -1], [-1, 1]]})");
    CHECK(e.size() == 4);
    CHECK(e.is_separable);
    CHECK_THROWS_AS(constellation_from_json_text(R"({"points": [[1, 1, 0]]})"), std::invalid_argument);
    CHECK_THROWS_AS(constellation_from_json_text("{not json"), std::invalid_argument);
    CHECK_THROWS_AS(load_constellation_json("/nonexistent/file.json"), std::runtime_error);
  }
}
