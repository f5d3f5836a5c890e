#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nbf/config.hpp"
#include "nbf/room_acoustics.hpp"

namespace nbf {

/// One sampled test item.
struct ScenarioItem {
  std::string id;         // "utt00042"
  std::string condition;  // "sir_-5"
  std::uint64_t seed = 0; // stream seed for this item's dry signals
  RoomScenario scenario;
};

/// Label used for an SIR bucket, e.g. "sir_-5", "sir_0", "sir_2.5".
std::string sir_condition_label(double sir_db);

/// count_per_sir items for every SIR in the grid, in grid order. Item i is
/// drawn from its own counter-derived stream, so the result does not depend
/// on generation order. Throws ConfigError for invalid ranges, count < 1,
/// or when no valid placement is found.
std::vector<ScenarioItem> sample_scenarios(const ExperimentConfig& cfg, int count_per_sir, std::uint64_t seed);

nlohmann::json scenario_to_json(const RoomScenario& sc);
/// Throws ConfigError on schema violations.
RoomScenario scenario_from_json(const nlohmann::json& j);

/// Dry target and interference signals for an item: slices of the WAV pools
/// when configured, synthetic signals otherwise.
struct DrySignals {
  std::vector<double> target;
  std::vector<double> interference;
};
DrySignals dry_signals_for(const ScenarioItem& item, const ExperimentConfig& cfg);

struct ManifestEntry {
  std::string id;
  std::string condition;
  double sir_db = 0.0;
  std::string scenario;       // paths relative to the manifest directory
  std::string mixture;
  std::string target_direct;
  std::string target_reverb;
  std::map<std::string, std::string> sha256;  // path -> digest
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Checks that every referenced file exists and matches its recorded
/// digest. Throws IoError otherwise.
void verify_manifest(const DatasetManifest& m, const std::filesystem::path& root);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace nbf
