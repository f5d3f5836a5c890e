#pragma once

#include <span>
#include <vector>

namespace nbf {

inline constexpr double kSiSdrCapDb = 100.0;

/// Scale-invariant SDR in dB. Both signals are made zero-mean, then
///   alpha = <est, ref> / ||ref||^2,  SI-SDR = 10 log10(||alpha ref||^2 / ||alpha ref - est||^2),
/// clamped to [-100, 100] dB. Throws std::invalid_argument for unequal
/// lengths or a silent reference.
double si_sdr(std::span<const double> estimate, std::span<const double> reference);

/// Polyphase rational resampler (Kaiser-windowed sinc, beta 5, 10 zero
/// crossings per side at the lower rate) with zero group delay. Output
/// length ceil(n * up / down).
std::vector<double> resample(std::span<const double> x, int up, int down);

/// Extended short-time objective intelligibility (Jensen & Taal, 2016).
///
/// Signals are resampled to 10 kHz, frames more than 40 dB below the loudest
/// reference frame are dropped from both signals, 256-sample Hann frames
/// (hop 128, 512-point FFT) are grouped into 15 one-third octave bands from
/// 150 Hz, and 30-frame (384 ms) segments are row- then column-normalised
/// before correlating. Returns a value in [-1, 1]. Throws
/// std::invalid_argument when fewer than 30 frames remain.
double estoi(std::span<const double> estimate, std::span<const double> reference, int sample_rate_hz);

}  // namespace nbf
