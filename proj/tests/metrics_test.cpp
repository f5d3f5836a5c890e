#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nbf/metrics.hpp"
#include "nbf/rng.hpp"
#include "nbf/signals.hpp"

using namespace nbf;

namespace {

// ESTOI of the pair below, computed independently with the reference
// implementation at 10 kHz (no resampling involved).
constexpr double kEstoiToneAmTone = 0.473960006028727;
// ESTOI of white noise scored against synthetic speech (seed 2024, 3 s at
// 10 kHz, both rounded to float32), from the same reference implementation.
constexpr double kEstoiNoiseVsSpeech = -0.03604370623795333;

std::vector<double> am_tones(std::size_t n, double fs) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env = 0.5 + 0.5 * std::sin(2.0 * M_PI * 5.5 * t);
    x[i] = std::sin(2.0 * M_PI * 220.0 * t) * (0.6 + 0.4 * std::sin(2.0 * M_PI * 3.0 * t)) +
           0.5 * std::sin(2.0 * M_PI * 1250.0 * t + 0.3) * env * env;
  }
  return x;
}

std::vector<double> plus_fm_tone(std::vector<double> x, double fs) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] += 0.4 * std::sin(2.0 * M_PI * 700.0 * t + (300.0 / 0.7) * std::sin(2.0 * M_PI * 0.7 * t));
  }
  return x;
}

}  // namespace

TEST_CASE("SI-SDR of an orthogonal perturbation") {
  // 100 full periods: sin and cos are orthogonal and zero-mean.
  const std::size_t n = 1600;
  std::vector<double> ref(n), est(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = 2.0 * M_PI * static_cast<double>(i) / 16.0;
    ref[i] = std::sin(p);
    est[i] = std::sin(p) + 0.1 * std::cos(p);
  }
  CHECK(si_sdr(est, ref) == doctest::Approx(20.0).epsilon(1e-9));

  // Scale and offset invariance.
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = 3.0 * est[i] + 0.7;
  CHECK(si_sdr(scaled, ref) == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("SI-SDR clamps and validates") {
  const std::size_t n = 1600;
  std::vector<double> ref(n), ortho(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = 2.0 * M_PI * static_cast<double>(i) / 16.0;
    ref[i] = std::sin(p);
    ortho[i] = std::cos(p);
  }
  CHECK(si_sdr(ref, ref) == kSiSdrCapDb);
  CHECK(si_sdr(ortho, ref) == doctest::Approx(-kSiSdrCapDb));
  CHECK_THROWS_AS(si_sdr(std::vector<double>(n - 1, 1.0), ref), std::invalid_argument);
  CHECK_THROWS_AS(si_sdr(ref, std::vector<double>(n, 2.0)), std::invalid_argument);  // silent after mean removal
}

TEST_CASE("ESTOI matches the reference implementation") {
  const double fs = 10000.0;
  const auto x = am_tones(30000, fs);
  const auto y = plus_fm_tone(x, fs);
  CHECK(estoi(y, x, 10000) == doctest::Approx(kEstoiToneAmTone).epsilon(1e-8));
}

TEST_CASE("ESTOI of speech against unrelated noise") {
  Rng speech_rng(derive_seed(2024, 0));
  Rng noise_rng(derive_seed(2024, 1));
  auto s = synth_speech(speech_rng, 30000, 10000);
  auto n = synth_noise(NoiseKind::White, noise_rng, 30000, 10000);
  for (auto* v : {&s, &n})
    for (double& x : *v) x = static_cast<float>(x);
  const double score = estoi(n, s, 10000);
  CHECK(score < 0.2);
  CHECK(score == doctest::Approx(kEstoiNoiseVsSpeech).epsilon(1e-9));
}

TEST_CASE("ESTOI is invariant to gain on the reference") {
  const double fs = 10000.0;
  const auto x = am_tones(30000, fs);
  const auto y = plus_fm_tone(x, fs);
  std::vector<double> quiet(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) quiet[i] = 0.01 * x[i];
  CHECK(estoi(y, quiet, 10000) == doctest::Approx(estoi(y, x, 10000)).epsilon(1e-9));
}

TEST_CASE("SI-SDR never rises as noise is added") {
  Rng rng(derive_seed(5, 0));
  const auto s = synth_speech(rng, 16000, 16000);
  const auto n = synth_noise(NoiseKind::White, rng, 16000, 16000);
  double prev = kSiSdrCapDb + 1.0;
  for (double g : {0.0, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0}) {
    std::vector<double> mix(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mix[i] = s[i] + g * n[i];
    const double v = si_sdr(mix, s);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("ESTOI identities") {
  const double fs = 10000.0;
  const auto x = am_tones(30000, fs);
  CHECK(estoi(x, x, 10000) == doctest::Approx(1.0).epsilon(1e-12));
  // Envelopes are magnitudes, so a polarity flip is invisible.
  std::vector<double> neg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
  CHECK(estoi(neg, x, 10000) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> louder(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) louder[i] = 4.0 * x[i];
  CHECK(estoi(louder, x, 10000) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ESTOI needs a full segment") {
  const auto x = am_tones(3000, 10000.0);  // about 23 frames
  CHECK_THROWS_AS(estoi(x, x, 10000), std::invalid_argument);
  CHECK_THROWS_AS(estoi(std::vector<double>(29999, 0.1), am_tones(30000, 10000.0), 10000), std::invalid_argument);
}

TEST_CASE("resampling preserves an in-band sine") {
  const std::size_t n = 16000;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / 16000.0);
  const auto y = resample(x, 5, 8);
  REQUIRE(y.size() == 10000);
  double worst = 0.0;
  for (std::size_t i = 200; i + 200 < y.size(); ++i)
    worst = std::max(worst, std::abs(y[i] - std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / 10000.0)));
  CHECK(worst < 1e-3);

  CHECK(resample(x, 1, 1) == x);
  CHECK(resample(std::vector<double>(7, 1.0), 5, 8).size() == 5);
}
