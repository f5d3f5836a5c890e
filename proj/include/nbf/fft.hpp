#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace nbf {

using cplx = std::complex<double>;

/// Real-input FFT of a fixed length backed by FFTW. Plans are created once;
/// transforms use the new-array execute API and are safe to call from
/// several threads on the same object.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t num_bins() const { return n_ / 2 + 1; }

  /// out[k] = sum_n in[n] exp(-j 2 pi k n / N), k = 0..N/2.
  void forward(std::span<const double> in, std::span<cplx> out) const;

  /// Inverse of forward including the 1/N factor.
  void inverse(std::span<const cplx> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

/// Linear convolution via zero-padded FFT. Result length a.size()+b.size()-1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace nbf
