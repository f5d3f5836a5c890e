#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "nbf/array_model.hpp"
#include "nbf/stft.hpp"
#include "nbf/tensor_io.hpp"

namespace nbf {

inline constexpr double kDefaultDiagonalLoading = 1e-5;

/// Coherence of an isotropic diffuse field between microphone pairs at STFT
/// bin f: Gamma(i, j) = sinc(2 pi f_s f l_ij / (N c)), sinc(x) = sin(x)/x.
/// Real symmetric with unit diagonal. Throws std::out_of_range for bad bins.
Eigen::MatrixXd diffuse_coherence(const ArrayGeometry& geom, int bin, const StftConfig& cfg);

/// Super-directive weights for one look direction and bin:
///   w = (Gamma + eps I)^-1 v / (v^H (Gamma + eps I)^-1 v).
/// Eigenvalues below 1e-10 * max|lambda| are dropped, so a
/// numerically singular unloaded system yields the minimum-norm solution and
/// w^H v = 1 still holds to rounding. Throws NumericalError for eps = 0 at
/// bin 0 with more than one microphone, or a non-finite result.
std::vector<cplx> sd_weights(const ArrayGeometry& geom, const Doa& look, int bin, double eps,
                             const StftConfig& cfg);

/// Look angles d * 180 / (D - 1), d = 0..D-1. Requires D >= 2.
std::vector<Doa> uniform_look_angles(int num_beams);

/// D super-directive beamformers sampling [0, 180] degrees uniformly.
struct FixedBeamformerBank {
  ArrayGeometry geometry;
  StftConfig config;
  std::vector<Doa> look_angles;
  double diag_loading = kDefaultDiagonalLoading;
  // Unset: w_d^H v(theta_d) = 1 with v referenced to the array centroid.
  // Set to r: w_d^H v(theta_d) / v_r(theta_d) = 1, so beams are time-aligned
  // with microphone r.
  std::optional<std::size_t> phase_reference_mic;
  std::vector<cplx> weights;  // [beam][bin][mic]

  std::size_t num_beams() const { return look_angles.size(); }
  std::size_t num_bins() const { return static_cast<std::size_t>(config.num_bins()); }
  std::size_t num_mics() const { return geometry.num_mics(); }

  std::span<const cplx> weight(std::size_t beam, std::size_t bin) const {
    return {weights.data() + (beam * num_bins() + bin) * num_mics(), num_mics()};
  }
};

/// Designs every (beam, bin) weight vector; see FixedBeamformerBank for the
/// phase reference. Throws std::invalid_argument for D < 2 or a bad reference
/// mic and NumericalError when a bin cannot be solved.
FixedBeamformerBank design_bank(const ArrayGeometry& geom, int num_beams, double eps,
                                const StftConfig& cfg,
                                std::optional<std::size_t> phase_reference_mic = std::nullopt);

/// D beam spectrograms B_d(t, f) = w_d(f)^H Y(t, f) and the angles that
/// produced them.
struct BeamSet {
  std::vector<Spectrogram> beams;
  std::vector<Doa> look_angles;
  StftConfig config;
  std::size_t num_samples = 0;

  std::size_t num_beams() const { return beams.size(); }
  std::size_t num_frames() const { return beams.empty() ? 0 : beams.front().num_frames; }
  std::size_t num_bins() const { return beams.empty() ? 0 : beams.front().num_bins; }
};

/// Frame-wise beamforming of a multichannel spectrogram.
BeamSet apply_bank(const FixedBeamformerBank& bank, const MultichannelSpectrogram& spec);

/// |w_d(f)^H v(theta, f)|^2 for every angle in the grid.
std::vector<double> beam_pattern(const FixedBeamformerBank& bank, std::size_t beam, int bin,
                                 std::span<const double> angles_deg);

/// |w^H v|^2 / (w^H w).
double white_noise_gain(const FixedBeamformerBank& bank, std::size_t beam, int bin);

/// 10 log10(|w^H v|^2 / (w^H Gamma w)) with the unloaded coherence matrix.
double directivity_index(const FixedBeamformerBank& bank, std::size_t beam, int bin);

/// Bank weights as an NBF1 tensor of shape [D][F][M].
ComplexTensor bank_to_tensor(const FixedBeamformerBank& bank);

/// Rebuilds a bank from a [D][F][M] tensor. The look angles are the uniform
/// grid for D. Throws std::invalid_argument on a shape mismatch.
FixedBeamformerBank bank_from_tensor(const ComplexTensor& t, const ArrayGeometry& geom,
                                     double eps, const StftConfig& cfg,
                                     std::optional<std::size_t> phase_reference_mic = std::nullopt);

}  // namespace nbf
