#include "nbf/stft.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nbf {

void StftConfig::validate() const {
  if (sample_rate_hz <= 0 || frame_len <= 0 || hop <= 0 || fft_size <= 0)
    throw std::invalid_argument("StftConfig: all parameters must be positive");
  if (frame_len % hop != 0)
    throw std::invalid_argument("StftConfig: hop must divide frame_len");
  if (frame_len > fft_size)
    throw std::invalid_argument("StftConfig: frame_len must not exceed fft_size");
  if (fft_size % 2 != 0) throw std::invalid_argument("StftConfig: fft_size must be even");
}

std::vector<double> periodic_hann(std::size_t len) {
  std::vector<double> w(len);
  for (std::size_t n = 0; n < len; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(n) / static_cast<double>(len));
  return w;
}

std::size_t num_frames_for(const StftConfig& cfg, std::size_t num_samples) {
  const std::size_t hop = static_cast<std::size_t>(cfg.hop);
  const std::size_t pad = static_cast<std::size_t>(cfg.frame_len - cfg.hop);
  return (num_samples + pad + hop - 1) / hop;
}

Stft::Stft(StftConfig cfg)
    : cfg_((cfg.validate(), cfg)),
      window_(periodic_hann(static_cast<std::size_t>(cfg.frame_len))),
      fft_(static_cast<std::size_t>(cfg.fft_size)) {}

Spectrogram Stft::analyze_channel(std::span<const double> wave) const {
  if (wave.empty()) throw std::invalid_argument("Stft::analyze: zero-length input");
  const std::size_t frame_len = window_.size();
  const std::size_t hop = static_cast<std::size_t>(cfg_.hop);
  const std::size_t pad = frame_len - hop;
  const std::size_t frames = num_frames_for(cfg_, wave.size());

  Spectrogram out(frames, static_cast<std::size_t>(cfg_.num_bins()));
  std::vector<double> buf(static_cast<std::size_t>(cfg_.fft_size));
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(buf.begin(), buf.end(), 0.0);
    // Frame t covers padded samples [t*hop, t*hop + frame_len); padded
    // index q maps to input sample q - pad.
    for (std::size_t n = 0; n < frame_len; ++n) {
      const std::size_t q = t * hop + n;
      if (q < pad) continue;
      const std::size_t i = q - pad;
      if (i >= wave.size()) break;
      buf[n] = wave[i] * window_[n];
    }
    fft_.forward(buf, out.frame(t));
  }
  return out;
}

MultichannelSpectrogram Stft::analyze(std::span<const std::vector<double>> wave) const {
  if (wave.empty()) throw std::invalid_argument("Stft::analyze: no channels");
  const std::size_t len = wave.front().size();
  for (const auto& ch : wave)
    if (ch.size() != len) throw std::invalid_argument("Stft::analyze: channel length mismatch");
  MultichannelSpectrogram spec;
  spec.config = cfg_;
  spec.num_samples = len;
  spec.channels.reserve(wave.size());
  for (const auto& ch : wave) spec.channels.push_back(analyze_channel(ch));
  return spec;
}

std::vector<double> Stft::synthesize_channel(const Spectrogram& spec, std::size_t num_samples) const {
  if (spec.num_bins != static_cast<std::size_t>(cfg_.num_bins()))
    throw std::invalid_argument("Stft::synthesize: bin count does not match config");
  if (spec.num_frames != num_frames_for(cfg_, num_samples))
    throw std::invalid_argument("Stft::synthesize: frame count does not match sample count");

  const std::size_t frame_len = window_.size();
  const std::size_t hop = static_cast<std::size_t>(cfg_.hop);
  const std::size_t pad = frame_len - hop;
  const std::size_t padded = (spec.num_frames - 1) * hop + frame_len;

  std::vector<double> acc(padded, 0.0), norm(padded, 0.0);
  std::vector<double> buf(static_cast<std::size_t>(cfg_.fft_size));
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    fft_.inverse(spec.frame(t), buf);
    for (std::size_t n = 0; n < frame_len; ++n) {
      acc[t * hop + n] += buf[n] * window_[n];
      norm[t * hop + n] += window_[n] * window_[n];
    }
  }
  std::vector<double> out(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) {
    const double w2 = norm[i + pad];
    out[i] = w2 > 1e-12 ? acc[i + pad] / w2 : 0.0;
  }
  return out;
}

std::vector<std::vector<double>> Stft::synthesize(const MultichannelSpectrogram& spec) const {
  if (!(spec.config == cfg_)) throw std::invalid_argument("Stft::synthesize: config mismatch");
  std::vector<std::vector<double>> out;
  out.reserve(spec.num_channels());
  for (const auto& ch : spec.channels) out.push_back(synthesize_channel(ch, spec.num_samples));
  return out;
}

}  // namespace nbf
