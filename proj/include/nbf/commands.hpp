#pragma once

#include <filesystem>
#include <memory>

#include "nbf/beam_fusion.hpp"
#include "nbf/config.hpp"
#include "nbf/dataset.hpp"
#include "nbf/fixed_beamformer.hpp"
#include "nbf/report.hpp"
#include "nbf/wav.hpp"

namespace nbf {

/// Inputs shared by the command line subcommands. Empty paths fall back to
/// locations under out_dir.
struct CommandContext {
  ExperimentConfig config;
  std::filesystem::path out_dir;
  std::filesystem::path manifest;  // default: out_dir/manifest.json
  std::filesystem::path bank;      // precomputed bank tensor; designed on the fly when empty
  std::filesystem::path tensors;   // external_tensor directory; default: config.tensor_dir
  std::filesystem::path enhanced;  // eval input; default: out_dir/enhanced
  bool unprocessed = false;        // eval the reference microphone instead
  int jobs = 1;

  std::filesystem::path manifest_path() const;
  std::filesystem::path enhanced_dir() const;
};

/// Designs the bank and writes bank.nbf ([D][F][M]) and bank.json.
FixedBeamformerBank cmd_design(const CommandContext& ctx);

/// Samples count_per_sir scenes per SIR, simulates them and writes the
/// per-item WAV/JSON files plus manifest.json.
DatasetManifest cmd_simulate(const CommandContext& ctx);

/// Runs the configured provider on every manifest item and writes
/// enhanced/<id>.wav.
void cmd_enhance(const CommandContext& ctx);

/// Scores enhanced (or unprocessed) signals against the oracle target and
/// writes metrics.csv and metrics.json (metrics_unprocessed.* with
/// ctx.unprocessed).
MetricReport cmd_eval(const CommandContext& ctx);

/// Writes beams/<id>.beams.nbf [D][T][F], <id>.reference.nbf [T][F],
/// <id>.target.nbf [T][F] and beams/index.json for every manifest item.
void cmd_export_beams(const CommandContext& ctx);

/// Loads the bank from ctx.bank or designs it from the config.
FixedBeamformerBank load_or_design_bank(const CommandContext& ctx);

/// Everything the providers may need for one manifest item.
struct ItemData {
  ManifestEntry entry;
  RoomScenario scenario;
  Audio mixture;
  std::vector<double> target;  // oracle target waveform (direct or reverberant)
};
ItemData load_item(const CommandContext& ctx, const ManifestEntry& entry);

/// Builds the configured provider for one item. `spec` is the item's
/// multichannel STFT; `beams` is only used by neural_remote.
std::unique_ptr<WeightProvider> make_provider(const CommandContext& ctx, const ItemData& item,
                                              const FixedBeamformerBank& bank, const MultichannelSpectrogram& spec);

}  // namespace nbf
