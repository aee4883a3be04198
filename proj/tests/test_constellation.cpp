#include <doctest.h>

#include <cmath>

#include "dmqkd/constellation.hpp"

using namespace dmqkd;

TEST_CASE("single-point QAM") {
  const auto c = qam_constellation({1, 0.5, 3.0});
  REQUIRE(c.size() == 1);
  CHECK(c.points[0] == std::complex<double>(0, 0));
  CHECK(c.probs[0] == doctest::Approx(1.0));
}

TEST_CASE("4-QAM probabilities are uniform by symmetry") {
  const auto c = qam_constellation({2, 0.7, 1.7});
  REQUIRE(c.size() == 4);
  for (double p : c.probs) CHECK(p == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("16-QAM discrete-Gaussian weights match direct evaluation") {
  const double vg = 3.0;
  const auto c = qam_constellation({4, 0.4, vg});
  // Oracle: unnormalized weights exp(-|grid point|^2 / (2 V_G)) on the
  // unit-spacing grid, normalized by their sum.
  double z = 0;
  std::vector<double> expected;
  for (int mu = 1; mu <= 4; ++mu)
    for (int nu = 1; nu <= 4; ++nu) {
      const double gx = 2 * mu - 1 - 4, gy = 2 * nu - 1 - 4;
      expected.push_back(std::exp(-(gx * gx + gy * gy) / (2 * vg)));
      z += expected.back();
    }
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(c.probs[i] == doctest::Approx(expected[i] / z).epsilon(1e-14));

  // Corner (|grid|^2 = 18) vs inner (|grid|^2 = 2) ratio = e^{-3} / e^{-1/3}.
  const double corner = c.probs[0];
  const double inner = c.probs[5];
  CHECK(corner / inner ==
        doctest::Approx(std::exp(-3.0) / std::exp(-1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("probabilities do not depend on the spacing r") {
  const auto a = qam_constellation({4, 0.2, 5.0});
  const auto b = qam_constellation({4, 1.9, 5.0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.probs[i] == doctest::Approx(b.probs[i]).epsilon(1e-15));
    CHECK(std::abs(b.points[i]) ==
          doctest::Approx(std::abs(a.points[i]) * (1.9 / 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("moments of a single point") {
  Constellation c;
  c.points = {{0, 0}};
  c.probs = {1.0};
  const auto m = constellation_moments(c);
  CHECK(m.mean_x == 0);
  CHECK(m.mean_p == 0);
  CHECK(m.var_x == doctest::Approx(1.0));
  CHECK(m.var_p == doctest::Approx(1.0));
}

TEST_CASE("moments of a balanced two-point constellation") {
  Constellation c;
  c.points = {{1, 0}, {-1, 0}};
  c.probs = {0.5, 0.5};
  const auto m = constellation_moments(c);
  // Quadrature means are +/- 2, so V_x = 1 + 4 and V_p = 1.
  CHECK(m.var_x == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(m.var_p == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.mean_x == doctest::Approx(0.0));
}

TEST_CASE("standard QAM moments are symmetric and centered") {
  for (int side : {2, 4, 8, 16}) {
    const auto c = qam_constellation({side, 0.33, 4.0});
    const auto m = constellation_moments(c);
    CHECK(m.mean_x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.mean_p == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.var_x == doctest::Approx(m.var_p).epsilon(1e-14));
    CHECK(m.var_x >= 1.0);
  }
}

TEST_CASE("calibrate_r closed form for 4-QAM") {
  // V_x = 1 + 4 r^2 for the L = 2 grid, so target 3 gives r = sqrt(0.5).
  const double r = calibrate_r(2, 2.0, 3.0);
  CHECK(r == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("calibrate_r hits the target variance") {
  const double r = calibrate_r(16, 11.0, 5.0);
  const auto m = constellation_moments(qam_constellation({16, r, 11.0}));
  CHECK(m.var_x == doctest::Approx(5.0).epsilon(1e-10));

  const double r2 = calibrate_r(16, 11.0, 5.0, 1e-6);
  const auto m2 = constellation_moments(qam_constellation({16, r2, 11.0}));
  CHECK(std::abs(m2.var_x - 5.0) < 1e-6);
}

TEST_CASE("calibrate_r rejects degenerate targets") {
  CHECK_THROWS_AS(calibrate_r(1, 3.0, 3.0), numeric_error);
  CHECK_THROWS_AS(calibrate_r(4, 3.0, 1.0), numeric_error);
  CHECK_THROWS_AS(calibrate_r(4, 3.0, 0.5), numeric_error);
}

TEST_CASE("V_x grows monotonically with r") {
  double last = 0;
  for (double r : {0.1, 0.2, 0.4, 0.8, 1.6}) {
    const auto m = constellation_moments(qam_constellation({4, r, 3.0}));
    CHECK(m.var_x > last);
    last = m.var_x;
  }
}

TEST_CASE("four-fold symmetry of the standard QAM point set") {
  const auto c = qam_constellation({4, 0.5, 3.0});
  // For each point, its reflections and the x<->p swap are also points with
  // the same probability.
  const auto find = [&](std::complex<double> z) -> double {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (std::abs(c.points[i] - z) < 1e-12) return c.probs[i];
    return -1.0;
  };
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto z = c.points[i];
    CHECK(find({-z.real(), z.imag()}) == doctest::Approx(c.probs[i]));
    CHECK(find({z.real(), -z.imag()}) == doctest::Approx(c.probs[i]));
    CHECK(find({z.imag(), z.real()}) == doctest::Approx(c.probs[i]));
  }
}

TEST_CASE("custom constellation document round trip") {
  const std::string doc = R"({
    "type": "custom",
    "points": [
      {"x":  1.0, "p":  1.0, "prob": 0.25},
      {"x": -1.0, "p":  1.0, "prob": 0.25},
      {"x":  1.0, "p": -1.0, "prob": 0.25},
      {"x": -1.0, "p": -1.0, "prob": 0.25}
    ]
  })";
  const auto c = load_constellation(doc);
  REQUIRE(c.size() == 4);
  CHECK(!c.standard_qam);
  CHECK(c.points[0] == std::complex<double>(0.5, 0.5));  // amplitude = (x+ip)/2
}

TEST_CASE("non-normalized probabilities need auto_normalize") {
  const std::string doc = R"({
    "type": "custom",
    "points": [
      {"x": 1.0, "p": 0.0, "prob": 0.5},
      {"x": -1.0, "p": 0.0, "prob": 0.4}
    ]
  })";
  CHECK_THROWS_AS(load_constellation(doc), config_error);

  const std::string doc2 = R"({
    "type": "custom",
    "auto_normalize": true,
    "points": [
      {"x": 1.0, "p": 0.0, "prob": 0.5},
      {"x": -1.0, "p": 0.0, "prob": 0.4}
    ]
  })";
  const auto c = load_constellation(doc2);
  CHECK(c.probs[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("duplicate points and bad schemas are rejected") {
  CHECK_THROWS_AS(load_constellation(R"({
    "type": "custom",
    "points": [
      {"x": 1.0, "p": 0.0, "prob": 0.5},
      {"x": 1.0, "p": 0.0, "prob": 0.5}
    ]
  })"),
                  config_error);
  CHECK_THROWS_AS(load_constellation(R"({"type": "squeezed"})"), config_error);
  CHECK_THROWS_AS(load_constellation("not json"), config_error);
  CHECK_THROWS_AS(load_constellation(R"({
    "type": "custom",
    "points": [{"x": 1.0, "p": 0.0, "prob": -0.5}]
  })"),
                  config_error);
}

TEST_CASE("qam document with target_VA calibrates the spacing") {
  const auto c = load_constellation(R"({"type":"qam","L":4,"V_G":3.0,"target_VA":3.0})");
  const auto m = constellation_moments(c);
  CHECK(m.var_x == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(c.standard_qam);
  CHECK(c.qam_side == 4);
}
