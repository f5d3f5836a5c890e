#include "nbf/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace nbf {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw std::invalid_argument("RealFft: size must be positive");
  std::vector<double> re(n);
  std::vector<cplx> c(n / 2 + 1);
  auto* cbuf = reinterpret_cast<fftw_complex*>(c.data());
  const int len = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_1d(len, re.data(), cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->c2r = fftw_plan_dft_c2r_1d(len, cbuf, re.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != num_bins())
    throw std::invalid_argument("RealFft::forward: buffer size mismatch");
  // r2c leaves its input untouched but the API takes a non-const pointer.
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const cplx> in, std::span<double> out) const {
  if (in.size() != num_bins() || out.size() != n_)
    throw std::invalid_argument("RealFft::inverse: buffer size mismatch");
  // c2r destroys its input.
  std::vector<cplx> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  const std::size_t n = std::bit_ceil(len);
  RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<cplx> fa(fft.num_bins()), fb(fft.num_bins());
  fft.forward(pa, fa);
  fft.forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, pa);
  pa.resize(len);
  return pa;
}

}  // namespace nbf
