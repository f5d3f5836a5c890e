#include <doctest.h>

#include <cmath>

#include "nbf/array_model.hpp"

using namespace nbf;

TEST_CASE("ula is centred with the requested aperture") {
  const auto g = ula(9, 0.04);
  CHECK(g.num_mics() == 9);
  CHECK(g.mic_positions.front()[0] == doctest::Approx(-0.16));
  CHECK(g.mic_positions.back()[0] == doctest::Approx(0.16));
  const auto c = g.centroid();
  CHECK(std::abs(c[0]) < 1e-15);
  CHECK(g.distance(0, 8) == doctest::Approx(0.32));
}

TEST_CASE("doa range and unit vectors") {
  CHECK_THROWS_AS(Doa(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Doa(180.5), std::invalid_argument);
  CHECK(Doa(0.0).unit_vector() == Vec3{1.0, 0.0, 0.0});
  CHECK(Doa(90.0).unit_vector() == Vec3{0.0, 1.0, 0.0});
  CHECK(Doa(180.0).unit_vector() == Vec3{-1.0, 0.0, 0.0});
}

TEST_CASE("geometry validation") {
  ArrayGeometry empty;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
  ArrayGeometry dup{{{0, 0, 0}, {0, 0, 0}}, 343.0};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  auto g = ula(2, 0.04);
  g.speed_of_sound = 0.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("broadside steering vector is all ones") {
  const StftConfig cfg;
  const auto g = ula(9, 0.04);
  for (int f : {0, 10, 128, 256})
    for (const auto& v : steering_vector(g, Doa(90.0), f, cfg)) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("endfire delays follow the mic offsets") {
  const auto g = ula(9, 0.04);
  const auto tau = relative_delays(g, Doa(0.0));
  // A wave from +x reaches the mic at +0.16 m first.
  CHECK(tau[8] == doctest::Approx(-0.16 / 343.0));
  CHECK(tau[0] == doctest::Approx(0.16 / 343.0));
  CHECK(std::abs(tau[4]) < 1e-18);

  const StftConfig cfg;
  const int f = 64;  // 2 kHz
  const auto v = steering_vector(g, Doa(0.0), f, cfg);
  for (std::size_t m = 0; m < 9; ++m) {
    const cplx expected = std::polar(1.0, -2.0 * M_PI * 2000.0 * tau[m]);
    CHECK(std::abs(v[m] - expected) < 1e-12);
    CHECK(std::abs(v[m]) == doctest::Approx(1.0));
  }
}

TEST_CASE("permuting mics permutes steering entries") {
  const StftConfig cfg;
  auto g = ula(4, 0.05);
  auto p = g;
  std::swap(p.mic_positions[0], p.mic_positions[3]);
  std::swap(p.mic_positions[1], p.mic_positions[2]);
  const auto a = steering_vector(g, Doa(37.0), 100, cfg);
  const auto b = steering_vector(p, Doa(37.0), 100, cfg);
  for (std::size_t m = 0; m < 4; ++m) CHECK(std::abs(a[m] - b[3 - m]) < 1e-15);
}

TEST_CASE("out-of-range bin throws") {
  const StftConfig cfg;
  CHECK_THROWS_AS(steering_vector(ula(2, 0.04), Doa(10.0), 257, cfg), std::out_of_range);
  CHECK_THROWS_AS(steering_vector(ula(2, 0.04), Doa(10.0), -1, cfg), std::out_of_range);
}
