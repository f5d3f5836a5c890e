// nbf: command line front end for the beam-filter toolkit.
//
//   nbf design       --config cfg.json --out DIR
//   nbf simulate     --config cfg.json --out DIR [--seed N] [--jobs N]
//   nbf enhance      --config cfg.json --out DIR [--provider NAME] [--tensors DIR]
//   nbf eval         --config cfg.json --out DIR [--unprocessed]
//   nbf export-beams --config cfg.json --out DIR
//
// Exit codes: 0 ok, 2 configuration error, 3 I/O error, 4 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "nbf/commands.hpp"
#include "nbf/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> provider;
  std::optional<int> beams;
  int jobs = 1;
  std::string manifest;
  std::string bank;
  std::string tensors;
  std::string enhanced;
  bool unprocessed = false;
};

nbf::CommandContext build_context(const Flags& f) {
  nbf::CommandContext ctx;
  ctx.config = f.config.empty() ? nbf::ExperimentConfig{} : nbf::load_config(f.config);
  if (f.seed) ctx.config.seed = *f.seed;
  if (f.provider) ctx.config.provider = *f.provider;
  if (f.beams) ctx.config.beams = *f.beams;
  ctx.config.validate();

  std::string out = f.out;
  if (out.empty()) {
    if (const char* env = std::getenv("NBF_DATA_DIR")) out = env;
  }
  if (out.empty()) throw nbf::ConfigError("no output directory: pass --out or set NBF_DATA_DIR");
  ctx.out_dir = out;
  ctx.manifest = f.manifest;
  ctx.bank = f.bank;
  ctx.tensors = f.tensors;
  ctx.enhanced = f.enhanced;
  ctx.unprocessed = f.unprocessed;
  if (f.jobs < 1) throw nbf::ConfigError("--jobs must be >= 1");
  ctx.jobs = f.jobs;
  return ctx;
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "experiment config (JSON)");
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--out", f.out, "output directory (default: $NBF_DATA_DIR)");
  cmd->add_option("--provider", f.provider, "weight provider")
      ->check(CLI::IsMember({"nearest_beam", "minnorm", "perfect_residual", "external_tensor", "neural_remote", "zero"}));
  cmd->add_option("--beams", f.beams, "number of fixed beams D");
  cmd->add_option("--jobs", f.jobs, "worker threads");
  cmd->add_option("--manifest", f.manifest, "dataset manifest (default: OUT/manifest.json)");
  cmd->add_option("--bank", f.bank, "precomputed bank tensor (NBF1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural beam filter toolkit"};
  app.require_subcommand(1);
  Flags flags;

  auto* design = app.add_subcommand("design", "design the fixed beamformer bank");
  auto* simulate = app.add_subcommand("simulate", "sample scenes and simulate mixtures");
  auto* enhance = app.add_subcommand("enhance", "run the enhancement pipeline on a dataset");
  auto* eval = app.add_subcommand("eval", "score enhanced signals (SI-SDR, ESTOI)");
  auto* export_beams = app.add_subcommand("export-beams", "write beam/reference/target tensors");
  for (auto* cmd : {design, simulate, enhance, eval, export_beams}) add_common(cmd, flags);
  enhance->add_option("--tensors", flags.tensors, "directory of <id>.weights.nbf / <id>.residual.nbf");
  enhance->add_option("--enhanced", flags.enhanced, "output directory for enhanced WAVs");
  eval->add_option("--enhanced", flags.enhanced, "directory of enhanced WAVs");
  eval->add_flag("--unprocessed", flags.unprocessed, "score the reference microphone instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const nbf::CommandContext ctx = build_context(flags);
    if (design->parsed()) {
      const auto bank = nbf::cmd_design(ctx);
      std::cout << "bank [" << bank.num_beams() << "][" << bank.num_bins() << "][" << bank.num_mics() << "] -> "
                << (ctx.out_dir / "bank.nbf").string() << "\n";
    } else if (simulate->parsed()) {
      const auto m = nbf::cmd_simulate(ctx);
      std::cout << m.entries.size() << " items -> " << ctx.manifest_path().string() << "\n";
    } else if (enhance->parsed()) {
      nbf::cmd_enhance(ctx);
      std::cout << "enhanced -> " << ctx.enhanced_dir().string() << "\n";
    } else if (eval->parsed()) {
      const auto report = nbf::cmd_eval(ctx);
      std::cout << report.aggregate().dump(2) << "\n";
    } else if (export_beams->parsed()) {
      nbf::cmd_export_beams(ctx);
      std::cout << "beams -> " << (ctx.out_dir / "beams").string() << "\n";
    }
  } catch (const nbf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const nbf::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::logic_error& e) {
    // ConfigError, std::invalid_argument (shape/header mismatches), std::out_of_range.
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
