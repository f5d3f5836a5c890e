#include "nbf/commands.hpp"

#include <cstdlib>
#include <mutex>

#include "nbf/atomic_file.hpp"
#include "nbf/errors.hpp"
#include "nbf/metrics.hpp"
#include "nbf/tensor_io.hpp"

namespace nbf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
  return s;
}

std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

Spectrogram clean_spectrogram(const CommandContext& ctx, const ItemData& item) {
  return Stft(ctx.config.stft).analyze_channel(item.target);
}

OracleContext oracle_context(const CommandContext& ctx, const ItemData& item) {
  OracleContext oc;
  oc.clean = clean_spectrogram(ctx, item);
  oc.target_doa = Doa(item.scenario.target_azimuth_deg);
  oc.delta = ctx.config.minnorm_delta;
  oc.delta_relative = true;
  return oc;
}

std::unique_ptr<WeightProvider> make_oracle(const std::string& name, const OracleContext& oc,
                                            const FixedBeamformerBank& bank) {
  if (name == "nearest_beam") return make_nearest_beam_oracle(oc, bank.look_angles);
  if (name == "minnorm") return make_minnorm_oracle(oc);
  if (name == "zero") return make_zero_provider();
  throw ConfigError("unknown oracle provider '" + name + "'");
}

fs::path tensor_dir(const CommandContext& ctx) {
  if (!ctx.tensors.empty()) return ctx.tensors;
  if (!ctx.config.tensor_dir.empty()) return ctx.config.tensor_dir;
  throw ConfigError("external_tensor provider needs --tensors or config.tensor_dir");
}

void write_bank_files(const fs::path& dir, const FixedBeamformerBank& bank) {
  write_nbf1(dir / "bank.nbf", bank_to_tensor(bank));
  json angles = json::array();
  for (const auto& a : bank.look_angles) angles.push_back(a.azimuth_deg);
  json mics = json::array();
  for (const auto& p : bank.geometry.mic_positions) mics.push_back({p[0], p[1], p[2]});
  const json meta = {{"tensor", "bank.nbf"},
                     {"dims", {bank.num_beams(), bank.num_bins(), bank.num_mics()}},
                     {"look_angles_deg", angles},
                     {"diag_loading", bank.diag_loading},
                     {"phase_reference_mic", bank.phase_reference_mic ? json(*bank.phase_reference_mic) : json(nullptr)},
                     {"mic_positions", mics},
                     {"speed_of_sound", bank.geometry.speed_of_sound},
                     {"stft", stft_to_json(bank.config)}};
  write_file_atomic(dir / "bank.json", meta.dump(2) + "\n");
}

}  // namespace

fs::path CommandContext::manifest_path() const { return manifest.empty() ? out_dir / "manifest.json" : manifest; }
fs::path CommandContext::enhanced_dir() const { return enhanced.empty() ? out_dir / "enhanced" : enhanced; }

FixedBeamformerBank load_or_design_bank(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const ArrayGeometry geom = cfg.array.build();
  if (!ctx.bank.empty()) {
    auto bank = bank_from_tensor(read_nbf1(ctx.bank), geom, cfg.diag_loading, cfg.stft, cfg.reference_channel);
    if (static_cast<int>(bank.num_beams()) != cfg.beams)
      throw ConfigError("bank " + ctx.bank.string() + " has " + std::to_string(bank.num_beams()) +
                        " beams, config asks for " + std::to_string(cfg.beams));
    return bank;
  }
  return design_bank(geom, cfg.beams, cfg.diag_loading, cfg.stft, cfg.reference_channel);
}

FixedBeamformerBank cmd_design(const CommandContext& ctx) {
  ctx.config.validate();
  auto bank = design_bank(ctx.config.array.build(), ctx.config.beams, ctx.config.diag_loading, ctx.config.stft,
                          ctx.config.reference_channel);
  write_bank_files(ctx.out_dir, bank);
  return bank;
}

DatasetManifest cmd_simulate(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  const auto items = sample_scenarios(cfg, cfg.count_per_sir, cfg.seed);
  DatasetManifest manifest;
  manifest.seed = cfg.seed;
  manifest.entries.resize(items.size());
  const int fs_hz = cfg.stft.sample_rate_hz;

  parallel_for(items.size(), ctx.jobs, [&](std::size_t i) {
    const auto& item = items[i];
    const DrySignals dry = dry_signals_for(item, cfg);
    const Mixture mix = simulate_mixture(item.scenario, dry.target, dry.interference, fs_hz);

    ManifestEntry e;
    e.id = item.id;
    e.condition = item.condition;
    e.sir_db = item.scenario.sir_db;
    const std::string dir = "items/" + item.id + "/";
    e.scenario = dir + "scenario.json";
    e.mixture = dir + "mixture.wav";
    e.target_direct = dir + "target_direct.wav";
    e.target_reverb = dir + "target_reverb.wav";

    const std::string scenario_text = scenario_to_json(item.scenario).dump(2) + "\n";
    write_file_atomic(ctx.out_dir / e.scenario, scenario_text);
    write_wav(ctx.out_dir / e.mixture, Audio{fs_hz, mix.mixture});
    write_wav(ctx.out_dir / e.target_direct, Audio{fs_hz, {mix.target_direct}});
    write_wav(ctx.out_dir / e.target_reverb, Audio{fs_hz, {mix.target_reverb}});
    for (const auto* rel : {&e.scenario, &e.mixture, &e.target_direct, &e.target_reverb})
      e.sha256[*rel] = sha256_hex(read_file(ctx.out_dir / *rel));
    manifest.entries[i] = std::move(e);
  });

  write_manifest(ctx.manifest_path(), manifest);
  return manifest;
}

ItemData load_item(const CommandContext& ctx, const ManifestEntry& entry) {
  const fs::path root = ctx.manifest_path().parent_path();
  ItemData item;
  item.entry = entry;
  const std::string text = read_file(root / entry.scenario);
  try {
    item.scenario = scenario_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError(entry.scenario + ": " + e.what());
  }
  item.mixture = read_wav(root / entry.mixture);
  const auto target_path = root / (ctx.config.oracle_target == "direct" ? entry.target_direct : entry.target_reverb);
  Audio target = read_wav(target_path);
  if (target.num_channels() != 1 || target.num_samples() != item.mixture.num_samples())
    throw ConfigError(target_path.string() + ": expected a mono signal as long as the mixture");
  if (item.mixture.sample_rate_hz != ctx.config.stft.sample_rate_hz)
    throw ConfigError(entry.mixture + ": sample rate does not match the STFT config");
  item.target = std::move(target.channels.front());
  return item;
}

std::unique_ptr<WeightProvider> make_provider(const CommandContext& ctx, const ItemData& item,
                                              const FixedBeamformerBank& bank, const MultichannelSpectrogram& spec) {
  const auto& name = ctx.config.provider;
  if (name == "nearest_beam" || name == "minnorm" || name == "zero")
    return make_oracle(name, oracle_context(ctx, item), bank);
  if (name == "perfect_residual") {
    const auto oc = oracle_context(ctx, item);
    return make_perfect_residual_oracle(oc, make_oracle(ctx.config.perfect_residual_inner, oc, bank));
  }
  if (name == "external_tensor") {
    const fs::path dir = tensor_dir(ctx);
    return make_external_tensor_provider(dir / (item.entry.id + ".weights.nbf"),
                                         dir / (item.entry.id + ".residual.nbf"));
  }
  if (name == "neural_remote") {
    if (ctx.config.neural_command.empty()) throw ConfigError("neural_remote provider needs config.neural_command");
    const fs::path dir = ctx.out_dir / "neural";
    const BeamSet beams = apply_bank(bank, spec);
    const fs::path beams_path = dir / (item.entry.id + ".beams.nbf");
    const fs::path ref_path = dir / (item.entry.id + ".reference.nbf");
    const fs::path weights_path = dir / (item.entry.id + ".weights.nbf");
    const fs::path residual_path = dir / (item.entry.id + ".residual.nbf");
    write_nbf1(beams_path, planes_to_tensor(beams.beams));
    write_nbf1(ref_path, plane_to_tensor(spec.channels.at(ctx.config.reference_channel)));
    std::string cmd = ctx.config.neural_command;
    cmd = replace_all(cmd, "{id}", shell_quote(item.entry.id));
    cmd = replace_all(cmd, "{beams}", shell_quote(beams_path.string()));
    cmd = replace_all(cmd, "{reference}", shell_quote(ref_path.string()));
    cmd = replace_all(cmd, "{weights}", shell_quote(weights_path.string()));
    cmd = replace_all(cmd, "{residual}", shell_quote(residual_path.string()));
    if (std::system(cmd.c_str()) != 0) throw IoError("neural_remote: command failed for " + item.entry.id);
    return make_external_tensor_provider(weights_path, residual_path);
  }
  throw ConfigError("unknown provider '" + name + "'");
}

void cmd_enhance(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  const DatasetManifest manifest = read_manifest(ctx.manifest_path());
  verify_manifest(manifest, ctx.manifest_path().parent_path());
  const FixedBeamformerBank bank = load_or_design_bank(ctx);
  const Stft stft(cfg.stft);
  const fs::path out = ctx.enhanced_dir();

  parallel_for(manifest.entries.size(), ctx.jobs, [&](std::size_t i) {
    const ItemData item = load_item(ctx, manifest.entries[i]);
    const MultichannelSpectrogram spec = stft.analyze(item.mixture.channels);
    const auto provider = make_provider(ctx, item, bank, spec);
    auto wave = run_pipeline(spec, bank, *provider, cfg.reference_channel);
    for (double v : wave)
      if (!std::isfinite(v)) throw NumericalError("enhance: non-finite output for " + item.entry.id);
    write_wav(out / (item.entry.id + ".wav"), Audio{cfg.stft.sample_rate_hz, {std::move(wave)}});
  });
}

MetricReport cmd_eval(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  const DatasetManifest manifest = read_manifest(ctx.manifest_path());
  MetricReport report;
  report.rows.resize(manifest.entries.size());
  const fs::path enhanced = ctx.enhanced_dir();

  parallel_for(manifest.entries.size(), ctx.jobs, [&](std::size_t i) {
    const ItemData item = load_item(ctx, manifest.entries[i]);
    std::vector<double> estimate;
    if (ctx.unprocessed) {
      estimate = item.mixture.channels.at(cfg.reference_channel);
    } else {
      Audio a = read_wav(enhanced / (item.entry.id + ".wav"));
      if (a.num_channels() != 1 || a.num_samples() != item.target.size())
        throw ConfigError(item.entry.id + ": enhanced signal has the wrong shape");
      estimate = std::move(a.channels.front());
    }
    MetricRow row;
    row.utterance = item.entry.id;
    row.condition = item.entry.condition;
    row.si_sdr_db = si_sdr(estimate, item.target);
    row.estoi = estoi(estimate, item.target, cfg.stft.sample_rate_hz);
    report.rows[i] = row;
  });

  const std::string stem = ctx.unprocessed ? "metrics_unprocessed" : "metrics";
  write_file_atomic(ctx.out_dir / (stem + ".csv"), report.to_csv());
  write_file_atomic(ctx.out_dir / (stem + ".json"), report.aggregate().dump(2) + "\n");
  return report;
}

void cmd_export_beams(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  cfg.validate();
  const DatasetManifest manifest = read_manifest(ctx.manifest_path());
  verify_manifest(manifest, ctx.manifest_path().parent_path());
  const FixedBeamformerBank bank = load_or_design_bank(ctx);
  const Stft stft(cfg.stft);
  const fs::path dir = ctx.out_dir / "beams";
  std::vector<json> index(manifest.entries.size());

  parallel_for(manifest.entries.size(), ctx.jobs, [&](std::size_t i) {
    const ItemData item = load_item(ctx, manifest.entries[i]);
    const MultichannelSpectrogram spec = stft.analyze(item.mixture.channels);
    const BeamSet beams = apply_bank(bank, spec);
    const std::string id = item.entry.id;
    const auto beams_t = planes_to_tensor(beams.beams);
    write_nbf1(dir / (id + ".beams.nbf"), beams_t);
    write_nbf1(dir / (id + ".reference.nbf"), plane_to_tensor(spec.channels.at(cfg.reference_channel)));
    write_nbf1(dir / (id + ".target.nbf"), plane_to_tensor(stft.analyze_channel(item.target)));
    index[i] = {{"id", id},
                {"condition", item.entry.condition},
                {"beams", id + ".beams.nbf"},
                {"reference", id + ".reference.nbf"},
                {"target", id + ".target.nbf"},
                {"dims", beams_t.dims},
                {"num_samples", spec.num_samples}};
  });

  const json meta = {{"format", "nbf-beams-1"},
                     {"num_beams", bank.num_beams()},
                     {"look_angles_deg", [&] {
                        json a = json::array();
                        for (const auto& d : bank.look_angles) a.push_back(d.azimuth_deg);
                        return a;
                      }()},
                     {"stft", stft_to_json(cfg.stft)},
                     {"oracle_target", cfg.oracle_target},
                     {"items", index}};
  write_file_atomic(dir / "index.json", meta.dump(2) + "\n");
}

}  // namespace nbf
