#pragma once

#include <string>
#include <vector>

#include "nbf/rng.hpp"

namespace nbf {

/// Speech-like test signal: voiced syllables (harmonic series on a gliding
/// f0, shaped by three random formants and a raised-cosine envelope)
/// separated by pauses, with occasional unvoiced noise bursts. Scaled to an
/// RMS of 0.05. Deterministic for a given generator state.
std::vector<double> synth_speech(Rng& rng, std::size_t num_samples, int sample_rate_hz);

enum class NoiseKind { White, Babble, SpeechShaped };

NoiseKind parse_noise_kind(const std::string& name);
std::string to_string(NoiseKind kind);

/// White: Gaussian. Babble: sum of four synth_speech talkers.
/// SpeechShaped: white noise through a first-order low-pass at ~500 Hz.
/// Scaled to an RMS of 0.05.
std::vector<double> synth_noise(NoiseKind kind, Rng& rng, std::size_t num_samples, int sample_rate_hz);

}  // namespace nbf
