#include "nbf/fixed_beamformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nbf/errors.hpp"

namespace nbf {

namespace {

constexpr double kRankRcond = 1e-10;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

void check_bin(int bin, const StftConfig& cfg, const char* who) {
  if (bin < 0 || bin >= cfg.num_bins())
    throw std::out_of_range(std::string(who) + ": bin " + std::to_string(bin) + " out of range");
}

cplx inner(std::span<const cplx> w, std::span<const cplx> v) {
  cplx acc{};
  for (std::size_t m = 0; m < w.size(); ++m) acc += std::conj(w[m]) * v[m];
  return acc;
}

}  // namespace

Eigen::MatrixXd diffuse_coherence(const ArrayGeometry& geom, int bin, const StftConfig& cfg) {
  check_bin(bin, cfg, "diffuse_coherence");
  const std::size_t m = geom.num_mics();
  const double scale = 2.0 * M_PI * cfg.sample_rate_hz * bin / cfg.fft_size / geom.speed_of_sound;
  Eigen::MatrixXd gamma(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    gamma(i, i) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double c = sinc(scale * geom.distance(i, j));
      gamma(i, j) = c;
      gamma(j, i) = c;
    }
  }
  return gamma;
}

std::vector<cplx> sd_weights(const ArrayGeometry& geom, const Doa& look, int bin, double eps,
                             const StftConfig& cfg) {
  check_bin(bin, cfg, "sd_weights");
  if (!(eps >= 0.0)) throw std::invalid_argument("sd_weights: diagonal loading must be >= 0");
  const std::size_t m = geom.num_mics();
  if (eps == 0.0 && bin == 0 && m > 1)
    throw NumericalError("sd_weights: unloaded coherence matrix is singular at bin 0; use eps > 0");

  Eigen::MatrixXd a = diffuse_coherence(geom, bin, cfg);
  a.diagonal().array() += eps;

  const auto v = steering_vector(geom, look, bin, cfg);
  // Gamma is real, so solve for the real and imaginary parts together.
  Eigen::MatrixXd rhs(m, 2);
  for (std::size_t i = 0; i < m; ++i) {
    rhs(i, 0) = v[i].real();
    rhs(i, 1) = v[i].imag();
  }

  // Eigen-decomposition with a rank cut-off: the exact inverse whenever all
  // eigenvalues exceed kRankRcond * lambda_max (always true for eps >= 1e-8),
  // the minimum-norm solution otherwise. An unloaded Gamma at low bins has
  // eigenvalues near machine precision; inverting them yields weights around
  // 1e7 whose w^H v cannot be evaluated to better than ~1e-9.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success)
    throw NumericalError("sd_weights: eigen-decomposition failed at bin " + std::to_string(bin));
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double cutoff = lambda.cwiseAbs().maxCoeff() * kRankRcond;
  Eigen::VectorXd inv_lambda(m);
  for (std::size_t k = 0; k < m; ++k) inv_lambda(k) = lambda(k) > cutoff ? 1.0 / lambda(k) : 0.0;
  const Eigen::MatrixXd& u = eig.eigenvectors();
  const Eigen::MatrixXd sol = u * (inv_lambda.asDiagonal() * (u.transpose() * rhs));

  std::vector<cplx> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = {sol(i, 0), sol(i, 1)};
  const cplx denom = inner(v, w);  // v^H A^-1 v
  if (!std::isfinite(denom.real()) || !std::isfinite(denom.imag()) || std::abs(denom) == 0.0)
    throw NumericalError("sd_weights: degenerate normalisation at bin " + std::to_string(bin));
  // Dividing by the complex denominator (not its real part) keeps
  // w^H v = 1 exact even when rounding leaves an imaginary residue.
  for (auto& x : w) {
    x /= denom;
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw NumericalError("sd_weights: non-finite weight at bin " + std::to_string(bin));
  }
  return w;
}

std::vector<Doa> uniform_look_angles(int num_beams) {
  if (num_beams < 2) throw std::invalid_argument("uniform_look_angles: need at least 2 beams");
  std::vector<Doa> angles;
  angles.reserve(static_cast<std::size_t>(num_beams));
  for (int d = 0; d < num_beams; ++d) angles.emplace_back(d * 180.0 / (num_beams - 1));
  return angles;
}

FixedBeamformerBank design_bank(const ArrayGeometry& geom, int num_beams, double eps,
                                const StftConfig& cfg, std::optional<std::size_t> phase_reference_mic) {
  geom.validate();
  cfg.validate();
  if (phase_reference_mic && *phase_reference_mic >= geom.num_mics())
    throw std::invalid_argument("design_bank: phase reference mic " + std::to_string(*phase_reference_mic) +
                                " out of range");
  FixedBeamformerBank bank;
  bank.geometry = geom;
  bank.config = cfg;
  bank.look_angles = uniform_look_angles(num_beams);
  bank.diag_loading = eps;
  bank.phase_reference_mic = phase_reference_mic;
  const std::size_t m = geom.num_mics();
  const std::size_t bins = bank.num_bins();
  bank.weights.resize(bank.num_beams() * bins * m);
  for (std::size_t d = 0; d < bank.num_beams(); ++d) {
    const double tau_ref = phase_reference_mic ? relative_delays(geom, bank.look_angles[d])[*phase_reference_mic] : 0.0;
    for (std::size_t f = 0; f < bins; ++f) {
      auto w = sd_weights(geom, bank.look_angles[d], static_cast<int>(f), eps, cfg);
      // w^H (v / v_ref) = 1: the look direction passes as it arrives at the reference mic.
      const cplx align = std::polar(1.0, 2.0 * M_PI * cfg.bin_frequency_hz(static_cast<int>(f)) * tau_ref);
      for (auto& x : w) x *= align;
      std::copy(w.begin(), w.end(), bank.weights.begin() + static_cast<std::ptrdiff_t>((d * bins + f) * m));
    }
  }
  return bank;
}

BeamSet apply_bank(const FixedBeamformerBank& bank, const MultichannelSpectrogram& spec) {
  if (spec.num_channels() != bank.num_mics())
    throw std::invalid_argument("apply_bank: bank has " + std::to_string(bank.num_mics()) +
                                " mics, spectrogram has " + std::to_string(spec.num_channels()));
  if (spec.num_bins() != bank.num_bins())
    throw std::invalid_argument("apply_bank: bin count mismatch");
  const std::size_t frames = spec.num_frames();
  const std::size_t bins = bank.num_bins();
  BeamSet out;
  out.look_angles = bank.look_angles;
  out.config = spec.config;
  out.num_samples = spec.num_samples;
  out.beams.assign(bank.num_beams(), Spectrogram(frames, bins));
  for (std::size_t d = 0; d < bank.num_beams(); ++d) {
    auto& beam = out.beams[d];
    for (std::size_t f = 0; f < bins; ++f) {
      const auto w = bank.weight(d, f);
      for (std::size_t t = 0; t < frames; ++t) {
        cplx acc{};
        for (std::size_t m = 0; m < w.size(); ++m) acc += std::conj(w[m]) * spec.channels[m](t, f);
        beam(t, f) = acc;
      }
    }
  }
  return out;
}

std::vector<double> beam_pattern(const FixedBeamformerBank& bank, std::size_t beam, int bin,
                                 std::span<const double> angles_deg) {
  if (beam >= bank.num_beams()) throw std::out_of_range("beam_pattern: beam index out of range");
  check_bin(bin, bank.config, "beam_pattern");
  const auto w = bank.weight(beam, static_cast<std::size_t>(bin));
  std::vector<double> gains;
  gains.reserve(angles_deg.size());
  for (double a : angles_deg) {
    const auto v = steering_vector(bank.geometry, Doa(a), bin, bank.config);
    gains.push_back(std::norm(inner(w, v)));
  }
  return gains;
}

double white_noise_gain(const FixedBeamformerBank& bank, std::size_t beam, int bin) {
  if (beam >= bank.num_beams()) throw std::out_of_range("white_noise_gain: beam index out of range");
  check_bin(bin, bank.config, "white_noise_gain");
  const auto w = bank.weight(beam, static_cast<std::size_t>(bin));
  const auto v = steering_vector(bank.geometry, bank.look_angles[beam], bin, bank.config);
  double ww = 0.0;
  for (const auto& x : w) ww += std::norm(x);
  return std::norm(inner(w, v)) / ww;
}

double directivity_index(const FixedBeamformerBank& bank, std::size_t beam, int bin) {
  if (beam >= bank.num_beams()) throw std::out_of_range("directivity_index: beam index out of range");
  check_bin(bin, bank.config, "directivity_index");
  const auto w = bank.weight(beam, static_cast<std::size_t>(bin));
  const auto v = steering_vector(bank.geometry, bank.look_angles[beam], bin, bank.config);
  const Eigen::MatrixXd gamma = diffuse_coherence(bank.geometry, bin, bank.config);
  double quad = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) quad += (std::conj(w[i]) * gamma(i, j) * w[j]).real();
  return 10.0 * std::log10(std::norm(inner(w, v)) / quad);
}

ComplexTensor bank_to_tensor(const FixedBeamformerBank& bank) {
  ComplexTensor t({static_cast<std::uint32_t>(bank.num_beams()), static_cast<std::uint32_t>(bank.num_bins()),
                   static_cast<std::uint32_t>(bank.num_mics())});
  for (std::size_t i = 0; i < bank.weights.size(); ++i) t.data[i] = std::complex<float>(bank.weights[i]);
  return t;
}

FixedBeamformerBank bank_from_tensor(const ComplexTensor& t, const ArrayGeometry& geom, double eps,
                                     const StftConfig& cfg, std::optional<std::size_t> phase_reference_mic) {
  if (t.dims.size() != 3 || t.dims[1] != static_cast<std::uint32_t>(cfg.num_bins()) ||
      t.dims[2] != geom.num_mics())
    throw std::invalid_argument("bank tensor " + shape_string(t.dims) + " does not match [D][" +
                                std::to_string(cfg.num_bins()) + "][" + std::to_string(geom.num_mics()) + "]");
  FixedBeamformerBank bank;
  bank.geometry = geom;
  bank.config = cfg;
  bank.look_angles = uniform_look_angles(static_cast<int>(t.dims[0]));
  bank.diag_loading = eps;
  bank.phase_reference_mic = phase_reference_mic;
  bank.weights.resize(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) bank.weights[i] = cplx(t.data[i]);
  return bank;
}

}  // namespace nbf
