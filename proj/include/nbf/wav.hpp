#pragma once

#include <filesystem>
#include <vector>

namespace nbf {

enum class SampleFormat { Pcm16, Float32 };

/// Deinterleaved audio, samples in [-1, 1].
struct Audio {
  int sample_rate_hz = 16000;
  std::vector<std::vector<double>> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_samples() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Reads RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples (also
/// WAVE_FORMAT_EXTENSIBLE wrapping either). Throws IoError.
Audio read_wav(const std::filesystem::path& path);

/// Writes atomically (temporary file + rename). PCM16 output is scaled by
/// 32768, rounded to nearest and saturated. Throws IoError.
void write_wav(const std::filesystem::path& path, const Audio& audio,
               SampleFormat format = SampleFormat::Float32);

}  // namespace nbf
