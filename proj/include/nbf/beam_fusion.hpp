#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "nbf/fixed_beamformer.hpp"
#include "nbf/stft.hpp"

namespace nbf {

/// Per-bin complex filter G_d(t, f) for every beam, [d][t][f].
struct BeamWeights {
  std::vector<Spectrogram> planes;
  std::size_t num_beams() const { return planes.size(); }
};

/// Complex residual R(t, f).
using Residual = Spectrogram;

struct ProviderOutput {
  BeamWeights weights;
  Residual residual;
};

/// Producer of (G, R) from the beams and the reference spectrogram Y_0.
///
/// A provider that reports causal() == true promises that its outputs at
/// frame t depend on input frames <= t only. audit_causality checks the
/// promise empirically.
class WeightProvider {
 public:
  virtual ~WeightProvider() = default;
  virtual std::string name() const = 0;
  virtual bool causal() const = 0;
  virtual ProviderOutput produce(const BeamSet& beams, const Spectrogram& reference) const = 0;
};

/// X_BFM(t, f) = sum_d G_d(t, f) B_d(t, f).
Spectrogram fuse(const BeamSet& beams, const BeamWeights& g);

/// X(t, f) = X_BFM(t, f) + R(t, f).
Spectrogram refine(const Spectrogram& fused, const Residual& r);

/// Ground-truth side information for the analytic providers.
struct OracleContext {
  Spectrogram clean;          // target X at the reference microphone
  Doa target_doa{90.0};
  double delta = 1e-8;        // regulariser of the min-norm fit
  bool delta_relative = true; // scale delta by the causal mean beam power
};

/// Index of the look angle closest to `doa`; ties go to the lower index.
std::size_t nearest_beam_index(const std::vector<Doa>& look_angles, const Doa& doa);

/// All-zero weights and residual.
std::unique_ptr<WeightProvider> make_zero_provider();

/// G_d = 1 on the beam nearest the true DOA, 0 elsewhere; R = 0.
std::unique_ptr<WeightProvider> make_nearest_beam_oracle(const OracleContext& ctx,
                                                         const std::vector<Doa>& look_angles);

/// Per-bin minimum-norm fit of G B = X:
/// G(t, f) = conj(B(t, f)) X(t, f) / (||B(t, f)||^2 + delta); R = 0.
/// With delta_relative the effective delta at frame t is
/// delta * mean_{t' <= t, d, f} |B_d(t', f)|^2, which keeps the fit causal.
std::unique_ptr<WeightProvider> make_minnorm_oracle(const OracleContext& ctx);

/// Wraps `inner` and replaces its residual by X - fuse(B, G), so that the
/// refined output equals X exactly.
std::unique_ptr<WeightProvider> make_perfect_residual_oracle(const OracleContext& ctx,
                                                             std::unique_ptr<WeightProvider> inner);

/// Serves precomputed tensors, e.g. the output of the neural estimator.
/// Causality is a property of whoever produced the tensors, so the provider
/// reports causal() == false.
std::unique_ptr<WeightProvider> make_external_tensor_provider(BeamWeights g, Residual r);

/// Loads G [D][T][F] and R [T][F] from NBF1 files.
std::unique_ptr<WeightProvider> make_external_tensor_provider(const std::filesystem::path& weights,
                                                              const std::filesystem::path& residual);

struct CausalityReport {
  bool passed = false;
  double max_relative_change = 0.0;
};

/// Zeroes every input frame after t0 and compares the provider outputs at
/// frames <= t0 with those of the untouched input. Passes when the largest
/// change relative to the output peak is <= tolerance.
CausalityReport audit_causality(const WeightProvider& provider, const BeamSet& beams,
                                const Spectrogram& reference, std::size_t t0, double tolerance = 0.0);

/// apply_bank -> produce -> fuse -> refine, in the T-F domain.
Spectrogram enhance_spectrogram(const MultichannelSpectrogram& spec, const FixedBeamformerBank& bank,
                                const WeightProvider& provider, std::size_t reference_channel = 0);

/// enhance_spectrogram followed by synthesis to a waveform of the input length.
std::vector<double> run_pipeline(const MultichannelSpectrogram& spec, const FixedBeamformerBank& bank,
                                 const WeightProvider& provider, std::size_t reference_channel = 0);

}  // namespace nbf
