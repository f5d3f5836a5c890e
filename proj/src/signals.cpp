#include "nbf/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nbf {

namespace {

constexpr double kTargetRms = 0.05;

void normalize_rms(std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  if (acc == 0.0) return;
  const double g = kTargetRms / std::sqrt(acc / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

double resonance(double freq, double centre, double bandwidth) {
  const double r = (freq - centre) / bandwidth;
  return 1.0 / (1.0 + r * r);
}

}  // namespace

std::vector<double> synth_speech(Rng& rng, std::size_t num_samples, int fs) {
  std::vector<double> out(num_samples, 0.0);
  const double nyquist_guard = std::min(4000.0, 0.45 * fs);
  std::size_t pos = static_cast<std::size_t>(rng.uniform(0.0, 0.15) * fs);
  while (pos < num_samples) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.12, 0.30) * fs);
    const double f0_start = rng.uniform(90.0, 220.0);
    const double f0_end = f0_start * rng.uniform(0.8, 1.2);
    const double f1 = rng.uniform(300.0, 900.0);
    const double f2 = rng.uniform(900.0, 2500.0);
    const double f3 = rng.uniform(2400.0, 3500.0);
    const double level = rng.uniform(0.5, 1.0);
    const bool fricative = rng.uniform() < 0.25;
    const int harmonics = static_cast<int>(nyquist_guard / std::max(f0_start, f0_end));

    double phase = 0.0;
    double prev_noise = 0.0;
    for (std::size_t i = 0; i < len && pos + i < num_samples; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      const double env = std::pow(std::sin(M_PI * u), 2.0) * level;
      const double f0 = f0_start + (f0_end - f0_start) * u;
      phase += 2.0 * M_PI * f0 / fs;
      double s = 0.0;
      if (fricative) {
        // Differenced noise emphasises high frequencies.
        const double n = rng.normal();
        s = 0.3 * (n - prev_noise);
        prev_noise = n;
      } else {
        for (int k = 1; k <= harmonics; ++k) {
          const double fk = k * f0;
          const double amp = (resonance(fk, f1, 90.0) + 0.6 * resonance(fk, f2, 120.0) +
                              0.3 * resonance(fk, f3, 150.0)) / std::sqrt(static_cast<double>(k));
          s += amp * std::sin(k * phase);
        }
      }
      out[pos + i] += env * s;
    }
    pos += len + static_cast<std::size_t>(rng.uniform(0.03, 0.25) * fs);
    if (rng.uniform() < 0.15) pos += static_cast<std::size_t>(rng.uniform(0.2, 0.5) * fs);
  }
  normalize_rms(out);
  return out;
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "white") return NoiseKind::White;
  if (name == "babble") return NoiseKind::Babble;
  if (name == "speech_shaped") return NoiseKind::SpeechShaped;
  throw std::invalid_argument("unknown noise kind '" + name + "' (white | babble | speech_shaped)");
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::White: return "white";
    case NoiseKind::Babble: return "babble";
    case NoiseKind::SpeechShaped: return "speech_shaped";
  }
  return "white";
}

std::vector<double> synth_noise(NoiseKind kind, Rng& rng, std::size_t num_samples, int fs) {
  std::vector<double> out(num_samples, 0.0);
  switch (kind) {
    case NoiseKind::White:
      for (double& v : out) v = rng.normal();
      break;
    case NoiseKind::Babble:
      for (int talker = 0; talker < 4; ++talker) {
        const auto s = synth_speech(rng, num_samples, fs);
        for (std::size_t i = 0; i < num_samples; ++i) out[i] += s[i];
      }
      break;
    case NoiseKind::SpeechShaped: {
      const double a = std::exp(-2.0 * M_PI * 500.0 / fs);
      double state = 0.0;
      for (double& v : out) {
        state = a * state + (1.0 - a) * rng.normal();
        v = state;
      }
      break;
    }
  }
  normalize_rms(out);
  return out;
}

}  // namespace nbf
