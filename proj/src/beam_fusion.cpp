#include "nbf/beam_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nbf/tensor_io.hpp"

namespace nbf {

namespace {

void check_weights(const BeamSet& beams, const BeamWeights& g, const char* who) {
  if (g.num_beams() != beams.num_beams())
    throw std::invalid_argument(std::string(who) + ": weight/beam count mismatch");
  for (std::size_t d = 0; d < g.num_beams(); ++d)
    if (!g.planes[d].same_shape(beams.beams[d]))
      throw std::invalid_argument(std::string(who) + ": weight plane shape mismatch");
}

class ZeroProvider final : public WeightProvider {
 public:
  std::string name() const override { return "zero"; }
  bool causal() const override { return true; }
  ProviderOutput produce(const BeamSet& beams, const Spectrogram&) const override {
    ProviderOutput out;
    out.weights.planes.assign(beams.num_beams(), Spectrogram(beams.num_frames(), beams.num_bins()));
    out.residual = Spectrogram(beams.num_frames(), beams.num_bins());
    return out;
  }
};

class NearestBeamOracle final : public WeightProvider {
 public:
  explicit NearestBeamOracle(std::size_t index) : index_(index) {}
  std::string name() const override { return "nearest_beam"; }
  bool causal() const override { return true; }
  ProviderOutput produce(const BeamSet& beams, const Spectrogram&) const override {
    if (index_ >= beams.num_beams()) throw std::invalid_argument("nearest_beam: beam index out of range");
    ProviderOutput out;
    out.weights.planes.assign(beams.num_beams(), Spectrogram(beams.num_frames(), beams.num_bins()));
    std::fill(out.weights.planes[index_].data.begin(), out.weights.planes[index_].data.end(), cplx(1.0, 0.0));
    out.residual = Spectrogram(beams.num_frames(), beams.num_bins());
    return out;
  }

 private:
  std::size_t index_;
};

class MinNormOracle final : public WeightProvider {
 public:
  explicit MinNormOracle(OracleContext ctx) : ctx_(std::move(ctx)) {
    if (!(ctx_.delta > 0.0)) throw std::invalid_argument("minnorm: delta must be positive");
  }
  std::string name() const override { return "minnorm"; }
  bool causal() const override { return true; }
  ProviderOutput produce(const BeamSet& beams, const Spectrogram&) const override {
    const std::size_t frames = beams.num_frames(), bins = beams.num_bins(), nb = beams.num_beams();
    if (!ctx_.clean.same_shape(Spectrogram(frames, bins)) || nb == 0)
      throw std::invalid_argument("minnorm: clean reference does not match the beams");
    ProviderOutput out;
    out.weights.planes.assign(nb, Spectrogram(frames, bins));
    out.residual = Spectrogram(frames, bins);

    double power_sum = 0.0;  // running sum over frames <= t
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t d = 0; d < nb; ++d)
        for (std::size_t f = 0; f < bins; ++f) power_sum += std::norm(beams.beams[d](t, f));
      const double mean_power = power_sum / static_cast<double>((t + 1) * nb * bins);
      const double delta = ctx_.delta_relative ? ctx_.delta * mean_power : ctx_.delta;
      for (std::size_t f = 0; f < bins; ++f) {
        double energy = 0.0;
        for (std::size_t d = 0; d < nb; ++d) energy += std::norm(beams.beams[d](t, f));
        const double denom = energy + delta;
        if (denom == 0.0) continue;
        const cplx x = ctx_.clean(t, f);
        for (std::size_t d = 0; d < nb; ++d)
          out.weights.planes[d](t, f) = std::conj(beams.beams[d](t, f)) * x / denom;
      }
    }
    return out;
  }

 private:
  OracleContext ctx_;
};

class PerfectResidualOracle final : public WeightProvider {
 public:
  PerfectResidualOracle(Spectrogram clean, std::unique_ptr<WeightProvider> inner)
      : clean_(std::move(clean)), inner_(std::move(inner)) {
    if (!inner_) throw std::invalid_argument("perfect_residual: null inner provider");
  }
  std::string name() const override { return "perfect_residual(" + inner_->name() + ")"; }
  bool causal() const override { return inner_->causal(); }
  ProviderOutput produce(const BeamSet& beams, const Spectrogram& reference) const override {
    ProviderOutput out = inner_->produce(beams, reference);
    const Spectrogram fused = fuse(beams, out.weights);
    if (!clean_.same_shape(fused))
      throw std::invalid_argument("perfect_residual: clean reference does not match the beams");
    out.residual = Spectrogram(fused.num_frames, fused.num_bins);
    for (std::size_t i = 0; i < fused.data.size(); ++i) out.residual.data[i] = clean_.data[i] - fused.data[i];
    return out;
  }

 private:
  Spectrogram clean_;
  std::unique_ptr<WeightProvider> inner_;
};

class ExternalTensorProvider final : public WeightProvider {
 public:
  ExternalTensorProvider(BeamWeights g, Residual r) : g_(std::move(g)), r_(std::move(r)) {}
  std::string name() const override { return "external_tensor"; }
  bool causal() const override { return false; }
  ProviderOutput produce(const BeamSet& beams, const Spectrogram&) const override {
    check_weights(beams, g_, "external_tensor");
    if (!r_.same_shape(Spectrogram(beams.num_frames(), beams.num_bins())))
      throw std::invalid_argument("external_tensor: residual shape does not match the beams");
    return {g_, r_};
  }

 private:
  BeamWeights g_;
  Residual r_;
};

double max_abs_prefix(const Spectrogram& s, std::size_t t0) {
  double m = 0.0;
  for (std::size_t t = 0; t <= t0 && t < s.num_frames; ++t)
    for (const auto& v : s.frame(t)) m = std::max(m, std::abs(v));
  return m;
}

double max_diff_prefix(const Spectrogram& a, const Spectrogram& b, std::size_t t0) {
  double m = 0.0;
  for (std::size_t t = 0; t <= t0 && t < a.num_frames; ++t) {
    const auto fa = a.frame(t);
    const auto fb = b.frame(t);
    for (std::size_t f = 0; f < fa.size(); ++f) m = std::max(m, std::abs(fa[f] - fb[f]));
  }
  return m;
}

}  // namespace

Spectrogram fuse(const BeamSet& beams, const BeamWeights& g) {
  check_weights(beams, g, "fuse");
  Spectrogram out(beams.num_frames(), beams.num_bins());
  for (std::size_t d = 0; d < beams.num_beams(); ++d) {
    const auto& b = beams.beams[d].data;
    const auto& w = g.planes[d].data;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += w[i] * b[i];
  }
  return out;
}

Spectrogram refine(const Spectrogram& fused, const Residual& r) {
  if (!fused.same_shape(r)) throw std::invalid_argument("refine: residual shape mismatch");
  Spectrogram out = fused;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += r.data[i];
  return out;
}

std::size_t nearest_beam_index(const std::vector<Doa>& look_angles, const Doa& doa) {
  if (look_angles.empty()) throw std::invalid_argument("nearest_beam_index: no beams");
  std::size_t best = 0;
  double best_dist = std::abs(look_angles[0].azimuth_deg - doa.azimuth_deg);
  for (std::size_t d = 1; d < look_angles.size(); ++d) {
    const double dist = std::abs(look_angles[d].azimuth_deg - doa.azimuth_deg);
    if (dist < best_dist) {
      best = d;
      best_dist = dist;
    }
  }
  return best;
}

std::unique_ptr<WeightProvider> make_zero_provider() { return std::make_unique<ZeroProvider>(); }

std::unique_ptr<WeightProvider> make_nearest_beam_oracle(const OracleContext& ctx,
                                                         const std::vector<Doa>& look_angles) {
  return std::make_unique<NearestBeamOracle>(nearest_beam_index(look_angles, ctx.target_doa));
}

std::unique_ptr<WeightProvider> make_minnorm_oracle(const OracleContext& ctx) {
  return std::make_unique<MinNormOracle>(ctx);
}

std::unique_ptr<WeightProvider> make_perfect_residual_oracle(const OracleContext& ctx,
                                                             std::unique_ptr<WeightProvider> inner) {
  return std::make_unique<PerfectResidualOracle>(ctx.clean, std::move(inner));
}

std::unique_ptr<WeightProvider> make_external_tensor_provider(BeamWeights g, Residual r) {
  return std::make_unique<ExternalTensorProvider>(std::move(g), std::move(r));
}

std::unique_ptr<WeightProvider> make_external_tensor_provider(const std::filesystem::path& weights,
                                                              const std::filesystem::path& residual) {
  BeamWeights g{tensor_to_planes(read_nbf1(weights))};
  Residual r = tensor_to_plane(read_nbf1(residual));
  return make_external_tensor_provider(std::move(g), std::move(r));
}

CausalityReport audit_causality(const WeightProvider& provider, const BeamSet& beams,
                                const Spectrogram& reference, std::size_t t0, double tolerance) {
  const ProviderOutput full = provider.produce(beams, reference);

  BeamSet cut = beams;
  Spectrogram cut_ref = reference;
  for (auto& b : cut.beams)
    for (std::size_t t = t0 + 1; t < b.num_frames; ++t)
      for (auto& v : b.frame(t)) v = 0.0;
  for (std::size_t t = t0 + 1; t < cut_ref.num_frames; ++t)
    for (auto& v : cut_ref.frame(t)) v = 0.0;
  const ProviderOutput part = provider.produce(cut, cut_ref);

  double peak = max_abs_prefix(full.residual, t0);
  double diff = max_diff_prefix(full.residual, part.residual, t0);
  for (std::size_t d = 0; d < full.weights.num_beams(); ++d) {
    peak = std::max(peak, max_abs_prefix(full.weights.planes[d], t0));
    diff = std::max(diff, max_diff_prefix(full.weights.planes[d], part.weights.planes[d], t0));
  }
  CausalityReport report;
  report.max_relative_change = peak > 0.0 ? diff / peak : diff;
  report.passed = report.max_relative_change <= tolerance;
  return report;
}

Spectrogram enhance_spectrogram(const MultichannelSpectrogram& spec, const FixedBeamformerBank& bank,
                                const WeightProvider& provider, std::size_t reference_channel) {
  if (reference_channel >= spec.num_channels())
    throw std::invalid_argument("run_pipeline: reference channel out of range");
  const BeamSet beams = apply_bank(bank, spec);
  const ProviderOutput out = provider.produce(beams, spec.channels[reference_channel]);
  return refine(fuse(beams, out.weights), out.residual);
}

std::vector<double> run_pipeline(const MultichannelSpectrogram& spec, const FixedBeamformerBank& bank,
                                 const WeightProvider& provider, std::size_t reference_channel) {
  const Spectrogram enhanced = enhance_spectrogram(spec, bank, provider, reference_channel);
  return Stft(spec.config).synthesize_channel(enhanced, spec.num_samples);
}

}  // namespace nbf
