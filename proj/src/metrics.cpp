#include "nbf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "nbf/fft.hpp"

namespace nbf {

namespace {

constexpr int kEstoiRate = 10000;
constexpr std::size_t kFrameLen = 256;
constexpr std::size_t kHop = 128;
constexpr std::size_t kNfft = 512;
constexpr int kNumBands = 15;
constexpr double kMinFreq = 150.0;
constexpr std::size_t kSegment = 30;
constexpr double kDynamicRange = 40.0;

// Hann window without its zero end points (length n taken from n + 2).
std::vector<double> inner_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i + 1) / static_cast<double>(n + 1));
  return w;
}

// Drops frames of both signals where the reference is more than the dynamic
// range below its loudest frame and overlap-adds the survivors.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = inner_hann(kFrameLen);
  std::vector<std::size_t> starts;
  std::vector<double> energy;
  for (std::size_t i = 0; i + kFrameLen < x.size(); i += kHop) {
    double e = 0.0;
    for (std::size_t n = 0; n < kFrameLen; ++n) e += (w[n] * x[i + n]) * (w[n] * x[i + n]);
    starts.push_back(i);
    energy.push_back(20.0 * std::log10(std::sqrt(e) + std::numeric_limits<double>::epsilon()));
  }
  if (starts.empty()) {
    x.clear();
    y.clear();
    return;
  }
  const double loudest = *std::max_element(energy.begin(), energy.end());
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < starts.size(); ++k)
    if (energy[k] > loudest - kDynamicRange) kept.push_back(starts[k]);

  const std::size_t out_len = (kept.size() - 1) * kHop + kFrameLen;
  std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
  for (std::size_t k = 0; k < kept.size(); ++k)
    for (std::size_t n = 0; n < kFrameLen; ++n) {
      xs[k * kHop + n] += w[n] * x[kept[k] + n];
      ys[k * kHop + n] += w[n] * y[kept[k] + n];
    }
  x = std::move(xs);
  y = std::move(ys);
}

// |STFT|^2 per (frame, bin).
std::vector<std::vector<double>> power_frames(const std::vector<double>& x, const RealFft& fft) {
  const auto w = inner_hann(kFrameLen);
  std::vector<std::vector<double>> out;
  std::vector<double> buf(kNfft);
  std::vector<cplx> spec(fft.num_bins());
  for (std::size_t i = 0; i + kFrameLen < x.size(); i += kHop) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t n = 0; n < kFrameLen; ++n) buf[n] = w[n] * x[i + n];
    fft.forward(buf, spec);
    std::vector<double> p(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) p[k] = std::norm(spec[k]);
    out.push_back(std::move(p));
  }
  return out;
}

// One-third octave band edges as [lo, hi) bin ranges.
std::vector<std::pair<std::size_t, std::size_t>> third_octave_bands() {
  const std::size_t bins = kNfft / 2 + 1;
  auto nearest_bin = [&](double freq) {
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < bins; ++k) {
      const double fk = static_cast<double>(kEstoiRate) * k / kNfft;
      const double err = (fk - freq) * (fk - freq);
      if (err < best_err) {
        best_err = err;
        best = k;
      }
    }
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (int j = 0; j < kNumBands; ++j) {
    const double lo = kMinFreq * std::pow(2.0, (2.0 * j - 1.0) / 6.0);
    const double hi = kMinFreq * std::pow(2.0, (2.0 * j + 1.0) / 6.0);
    bands.emplace_back(nearest_bin(lo), nearest_bin(hi));
  }
  return bands;
}

// Band envelopes [band][frame].
std::vector<std::vector<double>> band_envelopes(const std::vector<std::vector<double>>& power) {
  static const auto bands = third_octave_bands();
  std::vector<std::vector<double>> env(bands.size(), std::vector<double>(power.size()));
  for (std::size_t j = 0; j < bands.size(); ++j)
    for (std::size_t m = 0; m < power.size(); ++m) {
      double acc = 0.0;
      for (std::size_t k = bands[j].first; k < bands[j].second; ++k) acc += power[m][k];
      env[j][m] = std::sqrt(acc);
    }
  return env;
}

// Subtract the mean and scale to unit norm; a constant vector becomes zero.
void center_and_normalize(std::span<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double norm = 0.0;
  for (double& x : v) {
    x -= mean;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x = norm > 0.0 ? x / norm : 0.0;
}

// Row (time) then column (band) normalisation of a J x N segment, stored
// row-major.
void row_col_normalize(std::vector<double>& seg, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) center_and_normalize({seg.data() + r * cols, cols});
  std::vector<double> col(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) col[r] = seg[r * cols + c];
    center_and_normalize(col);
    for (std::size_t r = 0; r < rows; ++r) seg[r * cols + c] = col[r];
  }
}

}  // namespace

double si_sdr(std::span<const double> estimate, std::span<const double> reference) {
  if (estimate.size() != reference.size()) throw std::invalid_argument("si_sdr: length mismatch");
  if (reference.empty()) throw std::invalid_argument("si_sdr: empty signals");
  const double n = static_cast<double>(reference.size());
  const double mean_est = std::accumulate(estimate.begin(), estimate.end(), 0.0) / n;
  const double mean_ref = std::accumulate(reference.begin(), reference.end(), 0.0) / n;
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = reference[i] - mean_ref;
    dot += (estimate[i] - mean_est) * r;
    ref_energy += r * r;
  }
  if (ref_energy == 0.0) throw std::invalid_argument("si_sdr: silent reference");
  const double alpha = dot / ref_energy;
  double target = 0.0, error = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = alpha * (reference[i] - mean_ref);
    const double e = s - (estimate[i] - mean_est);
    target += s * s;
    error += e * e;
  }
  if (error == 0.0) return target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / error), -kSiSdrCapDb, kSiSdrCapDb);
}

std::vector<double> resample(std::span<const double> x, int up, int down) {
  if (up <= 0 || down <= 0) throw std::invalid_argument("resample: factors must be positive");
  const int g = std::gcd(up, down);
  up /= g;
  down /= g;
  if (up == 1 && down == 1) return {x.begin(), x.end()};

  const int max_rate = std::max(up, down);
  const double cutoff = 1.0 / max_rate;  // relative to the upsampled Nyquist
  const int half_len = 10 * max_rate;
  const std::size_t taps = static_cast<std::size_t>(2 * half_len + 1);
  const double beta = 5.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t n = 0; n < taps; ++n) {
    const double m = static_cast<double>(n) - half_len;
    const double arg = cutoff * m;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double r = m / half_len;
    const double kaiser = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = cutoff * sinc * kaiser;
    sum += h[n];
  }
  for (double& v : h) v *= static_cast<double>(up) / sum;

  const std::size_t out_len = (x.size() * static_cast<std::size_t>(up) + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  const long long n_in = static_cast<long long>(x.size());
  for (std::size_t k = 0; k < out_len; ++k) {
    // Upsampled index of output k, filter centred on it.
    const long long centre = static_cast<long long>(k) * down + half_len;
    // Input j contributes through tap centre - j*up, which must lie in [0, taps).
    long long j_lo = (centre - static_cast<long long>(taps) + up) / up;
    if (j_lo < 0) j_lo = 0;
    long long j_hi = centre / up;
    if (j_hi >= n_in) j_hi = n_in - 1;
    double acc = 0.0;
    for (long long j = j_lo; j <= j_hi; ++j) {
      const long long tap = centre - j * up;
      if (tap >= 0 && tap < static_cast<long long>(taps)) acc += h[static_cast<std::size_t>(tap)] * x[static_cast<std::size_t>(j)];
    }
    y[k] = acc;
  }
  return y;
}

double estoi(std::span<const double> estimate, std::span<const double> reference, int fs) {
  if (estimate.size() != reference.size()) throw std::invalid_argument("estoi: length mismatch");
  std::vector<double> x, y;
  if (fs == kEstoiRate) {
    x.assign(reference.begin(), reference.end());
    y.assign(estimate.begin(), estimate.end());
  } else {
    x = resample(reference, kEstoiRate, fs);
    y = resample(estimate, kEstoiRate, fs);
  }
  remove_silent_frames(x, y);

  static const RealFft fft(kNfft);
  const auto x_env = band_envelopes(power_frames(x, fft));
  const auto y_env = band_envelopes(power_frames(y, fft));
  const std::size_t frames = x_env.front().size();
  if (frames < kSegment)
    throw std::invalid_argument("estoi: clip too short (" + std::to_string(frames) +
                                " active frames, need " + std::to_string(kSegment) + ")");

  const std::size_t bands = x_env.size();
  std::vector<double> xs(bands * kSegment), ys(bands * kSegment);
  double total = 0.0;
  std::size_t segments = 0;
  for (std::size_t end = kSegment; end <= frames; ++end) {
    for (std::size_t j = 0; j < bands; ++j)
      for (std::size_t n = 0; n < kSegment; ++n) {
        xs[j * kSegment + n] = x_env[j][end - kSegment + n];
        ys[j * kSegment + n] = y_env[j][end - kSegment + n];
      }
    row_col_normalize(xs, bands, kSegment);
    row_col_normalize(ys, bands, kSegment);
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) d += xs[i] * ys[i];
    total += d / static_cast<double>(kSegment);
    ++segments;
  }
  return total / static_cast<double>(segments);
}

}  // namespace nbf
