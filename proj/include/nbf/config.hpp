#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbf/array_model.hpp"
#include "nbf/stft.hpp"

namespace nbf {

/// Either a ULA shorthand or explicit positions.
struct ArraySpec {
  int ula_mics = 9;
  double ula_spacing_m = 0.04;
  std::vector<Vec3> positions;  // overrides the ULA shorthand when non-empty
  double speed_of_sound = kDefaultSpeedOfSound;

  ArrayGeometry build() const;
};

/// Sampling ranges for simulated scenes. Defaults reproduce the reference
/// experimental protocol (rooms 3x3x2.5 to 10x10x3 m, RT60 0.05-0.7 s,
/// sources 0.5-3 m from the array at 0-180 degrees, test SIRs -5..5 dB).
struct ScenarioRanges {
  Vec3 room_min{3.0, 3.0, 2.5};
  Vec3 room_max{10.0, 10.0, 3.0};
  double rt60_min = 0.05, rt60_max = 0.7;
  double distance_min = 0.5, distance_max = 3.0;
  double azimuth_min = 0.0, azimuth_max = 180.0;
  double min_separation_deg = 0.0;
  double wall_margin_m = 0.1;
  std::vector<double> sir_grid{-5.0, -2.0, 0.0, 2.0, 5.0};
  double duration_s = 3.0;
  std::string interference = "babble";  // white | babble | speech_shaped
  std::string speech_dir;               // optional pool of mono WAVs for targets
  std::string noise_dir;                // optional pool of mono WAVs for interference

  /// Throws ConfigError for inverted or physically meaningless ranges.
  void validate() const;
};

struct ExperimentConfig {
  StftConfig stft;
  ArraySpec array;
  int beams = 19;
  std::vector<int> allowed_beam_counts{10, 19, 37};
  double diag_loading = 1e-5;
  std::string provider = "nearest_beam";
  std::string perfect_residual_inner = "nearest_beam";
  std::string oracle_target = "direct";  // direct | reverberant
  double minnorm_delta = 1e-8;           // relative to the causal mean beam power
  std::size_t reference_channel = 0;
  std::string tensor_dir;                // external_tensor input directory
  std::string neural_command;            // neural_remote bridge command
  ScenarioRanges scenario;
  int count_per_sir = 150;
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

inline const std::vector<std::string> kProviderNames{"nearest_beam", "minnorm",        "perfect_residual",
                                                     "external_tensor", "neural_remote", "zero"};

/// Missing keys keep their defaults; unknown keys are rejected. Throws
/// ConfigError on schema violations.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Reads and validates a JSON config file. Throws IoError / ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json stft_to_json(const StftConfig& cfg);

}  // namespace nbf
