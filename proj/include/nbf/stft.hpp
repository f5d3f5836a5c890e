#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nbf/fft.hpp"

namespace nbf {

/// Framing parameters. Defaults: 16 kHz, 32 ms Hann frames, 50 % overlap,
/// 512-point FFT, 257 non-negative frequency bins.
struct StftConfig {
  int sample_rate_hz = 16000;
  int frame_len = 512;
  int hop = 256;
  int fft_size = 512;

  int num_bins() const { return fft_size / 2 + 1; }
  double bin_frequency_hz(int bin) const {
    return static_cast<double>(sample_rate_hz) * bin / fft_size;
  }
  /// Throws std::invalid_argument unless hop | frame_len, frame_len <= fft_size,
  /// fft_size is even and all values are positive.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

/// One complex [frame][bin] plane, row-major.
struct Spectrogram {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  std::vector<cplx> data;

  Spectrogram() = default;
  Spectrogram(std::size_t frames, std::size_t bins)
      : num_frames(frames), num_bins(bins), data(frames * bins) {}

  cplx& operator()(std::size_t t, std::size_t f) { return data[t * num_bins + f]; }
  const cplx& operator()(std::size_t t, std::size_t f) const { return data[t * num_bins + f]; }

  std::span<cplx> frame(std::size_t t) { return {data.data() + t * num_bins, num_bins}; }
  std::span<const cplx> frame(std::size_t t) const { return {data.data() + t * num_bins, num_bins}; }

  bool same_shape(const Spectrogram& o) const {
    return num_frames == o.num_frames && num_bins == o.num_bins;
  }
};

/// STFT of M microphone signals, Y_m(t, f). All channels share (T, F).
struct MultichannelSpectrogram {
  StftConfig config;
  std::size_t num_samples = 0;  // length of the analysed waveform
  std::vector<Spectrogram> channels;

  std::size_t num_channels() const { return channels.size(); }
  std::size_t num_frames() const { return channels.empty() ? 0 : channels.front().num_frames; }
  std::size_t num_bins() const { return channels.empty() ? 0 : channels.front().num_bins; }
};

/// Number of frames produced for a signal of `num_samples` samples.
std::size_t num_frames_for(const StftConfig& cfg, std::size_t num_samples);

/// Streaming analysis/synthesis pair.
///
/// Analysis zero-pads frame_len - hop samples in front of the signal and
/// enough samples at the end for every input sample to be covered by
/// frame_len / hop frames, applies a periodic Hann window and keeps bins
/// 0..N/2. Synthesis applies the same window again and divides by the
/// overlap-added squared window (weighted overlap-add), which makes
/// analyze -> synthesize an identity up to rounding.
class Stft {
 public:
  explicit Stft(StftConfig cfg);

  const StftConfig& config() const { return cfg_; }
  const std::vector<double>& window() const { return window_; }

  Spectrogram analyze_channel(std::span<const double> wave) const;
  MultichannelSpectrogram analyze(std::span<const std::vector<double>> wave) const;

  std::vector<double> synthesize_channel(const Spectrogram& spec, std::size_t num_samples) const;
  std::vector<std::vector<double>> synthesize(const MultichannelSpectrogram& spec) const;

 private:
  StftConfig cfg_;
  std::vector<double> window_;
  RealFft fft_;
};

/// Periodic Hann window w[n] = 0.5 - 0.5 cos(2 pi n / len).
std::vector<double> periodic_hann(std::size_t len);

}  // namespace nbf
