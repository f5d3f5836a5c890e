#include "nbf/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nbf/atomic_file.hpp"
#include "nbf/errors.hpp"
#include "nbf/signals.hpp"

namespace nbf {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void read_vec3(const json& j, const char* key, Vec3& out, const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v, where);
  if (v.size() != 3) throw ConfigError(where + "." + key + ": expected 3 numbers");
  out = {v[0], v[1], v[2]};
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

ArrayGeometry ArraySpec::build() const {
  try {
    if (!positions.empty()) {
      ArrayGeometry g;
      g.mic_positions = positions;
      g.speed_of_sound = speed_of_sound;
      g.validate();
      return g;
    }
    return ula(ula_mics, ula_spacing_m, speed_of_sound);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("array: ") + e.what());
  }
}

void ScenarioRanges::validate() const {
  for (int k = 0; k < 3; ++k)
    require(room_min[k] > 0.0 && room_min[k] <= room_max[k], "scenario: room_min must be positive and <= room_max");
  require(rt60_min >= 0.0 && rt60_min <= rt60_max, "scenario: need 0 <= rt60_min <= rt60_max");
  require(distance_min > 0.0 && distance_min <= distance_max, "scenario: need 0 < distance_min <= distance_max");
  require(azimuth_min >= 0.0 && azimuth_min <= azimuth_max && azimuth_max <= 180.0,
          "scenario: need 0 <= azimuth_min <= azimuth_max <= 180");
  require(min_separation_deg >= 0.0 && min_separation_deg <= azimuth_max - azimuth_min,
          "scenario: min_separation_deg must lie in [0, azimuth_max - azimuth_min]");
  require(wall_margin_m >= 0.0, "scenario: wall_margin_m must be >= 0");
  require(!sir_grid.empty(), "scenario: sir_grid must not be empty");
  for (double s : sir_grid) require(std::isfinite(s), "scenario: sir_grid entries must be finite");
  require(duration_s > 0.0, "scenario: duration_s must be positive");
  try {
    parse_noise_kind(interference);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario.interference: ") + e.what());
  }
}

void ExperimentConfig::validate() const {
  try {
    stft.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stft: ") + e.what());
  }
  array.build();
  require(beams >= 2, "beams must be >= 2");
  require(std::find(allowed_beam_counts.begin(), allowed_beam_counts.end(), beams) != allowed_beam_counts.end(),
          "beams=" + std::to_string(beams) + " is not in allowed_beam_counts");
  require(diag_loading >= 0.0 && std::isfinite(diag_loading), "diag_loading must be finite and >= 0");
  require(std::find(kProviderNames.begin(), kProviderNames.end(), provider) != kProviderNames.end(),
          "unknown provider '" + provider + "'");
  require(perfect_residual_inner == "nearest_beam" || perfect_residual_inner == "minnorm" ||
              perfect_residual_inner == "zero",
          "perfect_residual_inner must be nearest_beam, minnorm or zero");
  require(oracle_target == "direct" || oracle_target == "reverberant",
          "oracle_target must be 'direct' or 'reverberant'");
  require(minnorm_delta > 0.0, "minnorm_delta must be positive");
  require(reference_channel < array.build().num_mics(), "reference_channel out of range");
  require(count_per_sir >= 1, "count_per_sir must be >= 1");
  scenario.validate();
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  reject_unknown(j,
                 {"stft", "array", "beams", "allowed_beam_counts", "diag_loading", "provider",
                  "perfect_residual_inner", "oracle_target", "minnorm_delta", "reference_channel", "tensor_dir",
                  "neural_command", "scenario", "count_per_sir", "seed"},
                 "config");
  if (j.contains("stft")) {
    const auto& s = j.at("stft");
    reject_unknown(s, {"sample_rate_hz", "frame_len", "hop", "fft_size"}, "stft");
    read(s, "sample_rate_hz", cfg.stft.sample_rate_hz, "stft");
    read(s, "frame_len", cfg.stft.frame_len, "stft");
    read(s, "hop", cfg.stft.hop, "stft");
    read(s, "fft_size", cfg.stft.fft_size, "stft");
  }
  if (j.contains("array")) {
    const auto& a = j.at("array");
    reject_unknown(a, {"ula_mics", "ula_spacing_m", "positions", "speed_of_sound"}, "array");
    read(a, "ula_mics", cfg.array.ula_mics, "array");
    read(a, "ula_spacing_m", cfg.array.ula_spacing_m, "array");
    read(a, "speed_of_sound", cfg.array.speed_of_sound, "array");
    if (a.contains("positions")) {
      std::vector<std::vector<double>> pos;
      read(a, "positions", pos, "array");
      for (const auto& p : pos) {
        if (p.size() != 3) throw ConfigError("array.positions: each entry needs 3 coordinates");
        cfg.array.positions.push_back({p[0], p[1], p[2]});
      }
    }
  }
  read(j, "beams", cfg.beams, "config");
  read(j, "allowed_beam_counts", cfg.allowed_beam_counts, "config");
  read(j, "diag_loading", cfg.diag_loading, "config");
  read(j, "provider", cfg.provider, "config");
  read(j, "perfect_residual_inner", cfg.perfect_residual_inner, "config");
  read(j, "oracle_target", cfg.oracle_target, "config");
  read(j, "minnorm_delta", cfg.minnorm_delta, "config");
  read(j, "reference_channel", cfg.reference_channel, "config");
  read(j, "tensor_dir", cfg.tensor_dir, "config");
  read(j, "neural_command", cfg.neural_command, "config");
  read(j, "count_per_sir", cfg.count_per_sir, "config");
  read(j, "seed", cfg.seed, "config");
  if (j.contains("scenario")) {
    const auto& s = j.at("scenario");
    auto& r = cfg.scenario;
    reject_unknown(s,
                   {"room_min", "room_max", "rt60_min", "rt60_max", "distance_min", "distance_max", "azimuth_min",
                    "azimuth_max", "min_separation_deg", "wall_margin_m", "sir_grid", "duration_s", "interference",
                    "speech_dir", "noise_dir"},
                   "scenario");
    read_vec3(s, "room_min", r.room_min, "scenario");
    read_vec3(s, "room_max", r.room_max, "scenario");
    read(s, "rt60_min", r.rt60_min, "scenario");
    read(s, "rt60_max", r.rt60_max, "scenario");
    read(s, "distance_min", r.distance_min, "scenario");
    read(s, "distance_max", r.distance_max, "scenario");
    read(s, "azimuth_min", r.azimuth_min, "scenario");
    read(s, "azimuth_max", r.azimuth_max, "scenario");
    read(s, "min_separation_deg", r.min_separation_deg, "scenario");
    read(s, "wall_margin_m", r.wall_margin_m, "scenario");
    read(s, "sir_grid", r.sir_grid, "scenario");
    read(s, "duration_s", r.duration_s, "scenario");
    read(s, "interference", r.interference, "scenario");
    read(s, "speech_dir", r.speech_dir, "scenario");
    read(s, "noise_dir", r.noise_dir, "scenario");
  }
  cfg.validate();
  return cfg;
}

json stft_to_json(const StftConfig& s) {
  return {{"sample_rate_hz", s.sample_rate_hz}, {"frame_len", s.frame_len}, {"hop", s.hop}, {"fft_size", s.fft_size}};
}

json config_to_json(const ExperimentConfig& cfg) {
  json array = {{"ula_mics", cfg.array.ula_mics},
                {"ula_spacing_m", cfg.array.ula_spacing_m},
                {"speed_of_sound", cfg.array.speed_of_sound}};
  if (!cfg.array.positions.empty()) {
    json pos = json::array();
    for (const auto& p : cfg.array.positions) pos.push_back(vec3_json(p));
    array["positions"] = pos;
  }
  const auto& r = cfg.scenario;
  json scenario = {{"room_min", vec3_json(r.room_min)},
                   {"room_max", vec3_json(r.room_max)},
                   {"rt60_min", r.rt60_min},
                   {"rt60_max", r.rt60_max},
                   {"distance_min", r.distance_min},
                   {"distance_max", r.distance_max},
                   {"azimuth_min", r.azimuth_min},
                   {"azimuth_max", r.azimuth_max},
                   {"min_separation_deg", r.min_separation_deg},
                   {"wall_margin_m", r.wall_margin_m},
                   {"sir_grid", r.sir_grid},
                   {"duration_s", r.duration_s},
                   {"interference", r.interference},
                   {"speech_dir", r.speech_dir},
                   {"noise_dir", r.noise_dir}};
  return {{"stft", stft_to_json(cfg.stft)},
          {"array", array},
          {"beams", cfg.beams},
          {"allowed_beam_counts", cfg.allowed_beam_counts},
          {"diag_loading", cfg.diag_loading},
          {"provider", cfg.provider},
          {"perfect_residual_inner", cfg.perfect_residual_inner},
          {"oracle_target", cfg.oracle_target},
          {"minnorm_delta", cfg.minnorm_delta},
          {"reference_channel", cfg.reference_channel},
          {"tensor_dir", cfg.tensor_dir},
          {"neural_command", cfg.neural_command},
          {"scenario", scenario},
          {"count_per_sir", cfg.count_per_sir},
          {"seed", cfg.seed}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace nbf
