#include <doctest.h>

#include <cmath>

#include "nbf/rng.hpp"
#include "nbf/room_acoustics.hpp"
#include "nbf/signals.hpp"

using namespace nbf;

namespace {

// exp(-12 ln10 V / (c S rt60)) for a 5 x 4 x 3 m room at 0.3 s, evaluated independently.
constexpr double kEyring543At300ms = 0.842486460955813;
// Root of the direction-averaged lattice decay for 6 x 5 x 3 m at 0.3 s,
// found independently (4000-point sphere, 1/16 ms grid, Brent's method).
constexpr double kShoebox653At300ms = 0.7871590191210844;

std::size_t argmax_abs(const std::vector<double>& h) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.size(); ++i)
    if (std::abs(h[i]) > std::abs(h[best])) best = i;
  return best;
}

double power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

RoomScenario small_scene(double rt60) {
  RoomScenario sc;
  sc.geometry = ula(9, 0.04);
  sc.rt60 = rt60;
  sc.target_azimuth_deg = 90.0;
  sc.interference_azimuth_deg = 20.0;
  return sc;
}

}  // namespace

TEST_CASE("Eyring coefficient: golden value, anechoic limit, monotonicity, clip") {
  const Vec3 room{5.0, 4.0, 3.0};
  CHECK(rt60_to_reflection(room, 0.3) == doctest::Approx(kEyring543At300ms).epsilon(1e-12));
  CHECK(rt60_to_reflection(room, 0.0) == 0.0);
  CHECK(rt60_to_reflection(room, 1e-4) < 1e-10);
  double prev = 0.0;
  for (double rt : {0.05, 0.1, 0.3, 0.7, 1.5}) {
    const double b = rt60_to_reflection(room, rt);
    CHECK(b > prev);
    prev = b;
  }
  CHECK_THROWS_AS(rt60_to_reflection(room, 1e4), std::invalid_argument);
}

TEST_CASE("shoebox-calibrated coefficient") {
  const Vec3 room{6.0, 5.0, 3.0};
  CHECK(shoebox_reflection(room, 0.3) == doctest::Approx(kShoebox653At300ms).epsilon(1e-3));
  CHECK(shoebox_reflection(room, 0.3) < rt60_to_reflection(room, 0.3));
  CHECK(shoebox_reflection(room, 0.0) == 0.0);
  CHECK(shoebox_reflection(room, 0.2) < shoebox_reflection(room, 0.5));
  CHECK_THROWS_AS(shoebox_reflection(room, 1e4), std::invalid_argument);
}

TEST_CASE("anechoic image method is a single delayed, spread impulse") {
  const Vec3 room{8.0, 6.0, 3.0};
  const Vec3 src{1.0, 2.0, 1.5}, mic{4.0, 2.0, 1.5};  // 3 m apart
  const auto h = image_method_rir(room, 0.0, src, mic, 400, 16000);
  CHECK(argmax_abs(h) == 140);  // round(3 / 343 * 16000)
  CHECK(h[140] == doctest::Approx(1.0 / (4.0 * M_PI * 3.0)));
  int nonzero = 0;
  for (double v : h) nonzero += v != 0.0;
  CHECK(nonzero == 1);

  const Vec3 far_mic{7.0, 2.0, 1.5};  // 6 m
  const auto h2 = image_method_rir(room, 0.0, src, far_mic, 400, 16000);
  CHECK(h2[argmax_abs(h2)] == doctest::Approx(h[140] / 2.0));

  const auto d = direct_path_rir(src, mic, 400, 16000);
  CHECK(d == h);
}

TEST_CASE("fractional arrivals are band-limited impulses") {
  const Vec3 room{8.0, 6.0, 3.0};
  const Vec3 src{1.0, 2.0, 1.5};
  // Exactly 140 samples: only the centre tap survives.
  const Vec3 mic{1.0 + 140.0 * 343.0 / 16000.0, 2.0, 1.5};
  const auto h = direct_path_rir(src, mic, 400, 16000, 343.0, DelayMode::Fractional);
  const double amp = 1.0 / (4.0 * M_PI * 140.0 * 343.0 / 16000.0);
  CHECK(h[140] == doctest::Approx(amp));
  CHECK(std::abs(h[139]) < 1e-12 * amp);
  CHECK(std::abs(h[141]) < 1e-12 * amp);

  // Half a sample later: symmetric pair, unit DC gain.
  const Vec3 mic_half{mic[0] + 0.5 * 343.0 / 16000.0, 2.0, 1.5};
  const auto g = direct_path_rir(src, mic_half, 400, 16000, 343.0, DelayMode::Fractional);
  CHECK(g[140] == doctest::Approx(g[141]).epsilon(1e-9));
  double sum = 0.0;
  for (double v : g) sum += v;
  const double amp_half = 1.0 / (4.0 * M_PI * 140.5 * 343.0 / 16000.0);
  CHECK(sum == doctest::Approx(amp_half).epsilon(0.02));
}

TEST_CASE("image method rejects points outside the room and bad coefficients") {
  const Vec3 room{4.0, 4.0, 3.0};
  CHECK_THROWS_AS(image_method_rir(room, 0.5, {5.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, 100, 16000), std::invalid_argument);
  CHECK_THROWS_AS(image_method_rir(room, 0.5, {1.0, 1.0, 1.0}, {1.0, 1.0, 0.0}, 100, 16000), std::invalid_argument);
  CHECK_THROWS_AS(image_method_rir(room, 1.0, {1.0, 1.0, 1.0}, {2.0, 1.0, 1.0}, 100, 16000), std::invalid_argument);
}

TEST_CASE("first-order reflection from the floor") {
  // Source and mic at equal height h: the floor image travels sqrt(d^2 + (2h)^2).
  const Vec3 room{20.0, 20.0, 20.0};
  const Vec3 src{5.0, 10.0, 1.0}, mic{8.0, 10.0, 1.0};
  const auto h = image_method_rir(room, 0.5, src, mic, 2000, 16000);
  const double d_floor = std::sqrt(9.0 + 4.0);
  const auto k = static_cast<std::size_t>(std::lround(d_floor / 343.0 * 16000.0));
  CHECK(h[k] == doctest::Approx(0.5 / (4.0 * M_PI * d_floor)));
}

TEST_CASE("Schroeder fit recovers an exponential decay") {
  const int fs = 16000;
  const double rt = 0.4;
  std::vector<double> h(static_cast<std::size_t>(2.0 * fs));
  for (std::size_t n = 0; n < h.size(); ++n) h[n] = std::pow(10.0, -3.0 * static_cast<double>(n) / (fs * rt));
  CHECK(schroeder_rt60(h, fs) == doctest::Approx(rt).epsilon(1e-3));
  CHECK_THROWS_AS(schroeder_rt60(std::vector<double>(10, 0.0), fs), std::invalid_argument);
}

TEST_CASE("simulated RIRs hit their RT60 target and decay") {
  const int fs = 16000;
  RoomScenario sc = small_scene(0.3);
  const Vec3 src = sc.target_position();
  const Vec3 mic = sc.mic_positions()[0];
  const auto h = scenario_rir(sc, src, mic, rir_length_for(0.3, 1.5, fs), fs);
  CHECK(schroeder_rt60(h, fs) == doctest::Approx(0.3).epsilon(0.25));

  // 20 ms window energies after the direct path, compared two windows apart.
  const std::size_t win = 320, start = argmax_abs(h) + 32;
  std::vector<double> e;
  for (std::size_t i = start; i + win <= h.size(); i += win) {
    double acc = 0.0;
    for (std::size_t k = i; k < i + win; ++k) acc += h[k] * h[k];
    e.push_back(acc);
  }
  REQUIRE(e.size() > 10);
  for (std::size_t k = 0; k + 2 < e.size(); ++k) CHECK(e[k + 2] < e[k]);
}

TEST_CASE("rir length covers the direct path plus rt60 and is capped") {
  CHECK(rir_length_for(0.3, 3.43, 16000) == 160 + 4800 + 2);
  CHECK(rir_length_for(2.0, 3.0, 16000) == 16000);
  CHECK(rir_length_for(0.0, 0.0, 16000) == 2);
}

TEST_CASE("mixture: linearity, SIR scaling, cap, supervision targets") {
  const int fs = 16000;
  Rng rng(derive_seed(12, 0));
  const auto tgt = synth_speech(rng, fs, fs);
  const auto itf = synth_noise(NoiseKind::White, rng, fs, fs);
  RoomScenario sc = small_scene(0.25);
  sc.sir_db = 0.0;
  const auto mix = simulate_mixture(sc, tgt, itf, fs);
  REQUIRE(mix.mixture.size() == 9);
  double worst = 0.0;
  for (std::size_t m = 0; m < 9; ++m)
    for (std::size_t i = 0; i < mix.mixture[m].size(); ++i)
      worst = std::max(worst, std::abs(mix.mixture[m][i] - mix.target_image[m][i] - mix.interference_image[m][i]));
  CHECK(worst < 1e-10);
  CHECK(10.0 * std::log10(power(mix.target_image[0]) / power(mix.interference_image[0])) == doctest::Approx(0.0).epsilon(0.01));
  CHECK(mix.target_reverb == mix.target_image[0]);
  CHECK(mix.target_direct.size() == tgt.size());

  sc.sir_db = -5.0;
  const auto low = simulate_mixture(sc, tgt, itf, fs);
  CHECK(10.0 * std::log10(power(low.target_image[0]) / power(low.interference_image[0])) == doctest::Approx(-5.0).epsilon(0.002));

  sc.sir_db = 500.0;
  const auto capped = simulate_mixture(sc, tgt, itf, fs);
  CHECK(10.0 * std::log10(power(capped.target_image[0]) / power(capped.interference_image[0])) ==
        doctest::Approx(kMaxSirDb).epsilon(1e-6));

  const auto again = simulate_mixture(small_scene(0.25), tgt, itf, fs);
  CHECK(again.mixture == mix.mixture);
}

TEST_CASE("anechoic broadside target reaches every mic at once") {
  const int fs = 16000;
  Rng rng(derive_seed(13, 0));
  const auto tgt = synth_speech(rng, fs / 2, fs);
  const auto itf = synth_noise(NoiseKind::White, rng, fs / 2, fs);
  RoomScenario sc = small_scene(0.0);
  sc.target_distance_m = 2.0;
  const auto mix = simulate_mixture(sc, tgt, itf, fs);
  // Cross-correlation peak between mic 0 and mic m over lags -8..8.
  for (std::size_t m = 1; m < 9; ++m) {
    int best_lag = 99;
    double best = -1e300;
    for (int lag = -8; lag <= 8; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 8; i + 8 < tgt.size(); ++i)
        acc += mix.target_image[0][i] * mix.target_image[m][static_cast<std::size_t>(static_cast<long>(i) + lag)];
      if (acc > best) {
        best = acc;
        best_lag = lag;
      }
    }
    CHECK(best_lag == 0);
  }
}

TEST_CASE("mixture preconditions") {
  const int fs = 16000;
  std::vector<double> silent(1000, 0.0), tone(1000), shorter(999, 0.1);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(0.1 * static_cast<double>(i));
  const auto sc = small_scene(0.2);
  CHECK_THROWS_AS(simulate_mixture(sc, silent, tone, fs), std::invalid_argument);
  CHECK_THROWS_AS(simulate_mixture(sc, tone, silent, fs), std::invalid_argument);
  CHECK_THROWS_AS(simulate_mixture(sc, tone, shorter, fs), std::invalid_argument);
}

TEST_CASE("scenario validation") {
  RoomScenario sc = small_scene(0.3);
  CHECK_NOTHROW(sc.validate_reference_ranges());
  sc.target_distance_m = 4.0;  // beyond the 5 m wall from the centre at 2.5 m
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
  sc = small_scene(0.3);
  sc.rt60 = 0.9;
  CHECK_NOTHROW(sc.validate());
  CHECK_THROWS_AS(sc.validate_reference_ranges(), std::invalid_argument);
  sc = small_scene(0.3);
  sc.room_dims = {2.0, 2.0, 2.0};
  sc.array_center = {1.0, 1.0, 1.0};
  sc.target_distance_m = sc.interference_distance_m = 0.5;
  CHECK_NOTHROW(sc.validate());
  CHECK_THROWS_AS(sc.validate_reference_ranges(), std::invalid_argument);
}

TEST_CASE("mic positions are the geometry translated to the array centre") {
  RoomScenario sc = small_scene(0.3);
  const auto mics = sc.mic_positions();
  CHECK(mics[0][0] == doctest::Approx(3.0 - 0.16));
  CHECK(mics[8][0] == doctest::Approx(3.0 + 0.16));
  CHECK(mics[4][1] == doctest::Approx(2.5));
  const auto t = sc.target_position();  // broadside, 1.5 m
  CHECK(t[0] == doctest::Approx(3.0));
  CHECK(t[1] == doctest::Approx(4.0));
}
