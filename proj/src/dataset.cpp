#include "nbf/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "nbf/atomic_file.hpp"
#include "nbf/errors.hpp"
#include "nbf/rng.hpp"
#include "nbf/signals.hpp"
#include "nbf/wav.hpp"

namespace nbf {

namespace {

using nlohmann::json;

constexpr int kMaxPlacementAttempts = 1000;
constexpr std::uint64_t kStreamScene = 0;
constexpr std::uint64_t kStreamSignals = 1;

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const json& j, const char* key) {
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string("scenario.") + key + ": expected 3 numbers");
  return {v[0], v[1], v[2]};
}

bool inside_with_margin(const Vec3& room, const Vec3& p, double margin) {
  for (int k = 0; k < 3; ++k)
    if (!(p[k] > margin && p[k] < room[k] - margin)) return false;
  return true;
}

std::vector<double> pool_slice(const std::string& dir, Rng& rng, std::size_t n, int fs) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  if (files.empty()) throw ConfigError("no .wav files in " + dir);
  std::sort(files.begin(), files.end());
  const auto& pick = files[static_cast<std::size_t>(rng.next_u64() % files.size())];
  const Audio audio = read_wav(pick);
  if (audio.sample_rate_hz != fs)
    throw ConfigError(pick.string() + ": sample rate " + std::to_string(audio.sample_rate_hz) + " Hz, expected " +
                      std::to_string(fs));
  const auto& src = audio.channels.front();
  if (src.empty()) throw ConfigError(pick.string() + ": empty file");
  std::vector<double> out(n);
  const std::size_t offset = src.size() > n ? static_cast<std::size_t>(rng.next_u64() % (src.size() - n + 1)) : 0;
  for (std::size_t i = 0; i < n; ++i) out[i] = src[(offset + i) % src.size()];
  return out;
}

}  // namespace

std::string sir_condition_label(double sir_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sir_%g", sir_db);
  return buf;
}

std::vector<ScenarioItem> sample_scenarios(const ExperimentConfig& cfg, int count_per_sir, std::uint64_t seed) {
  if (count_per_sir < 1) throw ConfigError("sample_scenarios: count must be >= 1");
  const auto& r = cfg.scenario;
  r.validate();
  const ArrayGeometry geom = cfg.array.build();
  const Vec3 centroid = geom.centroid();
  Vec3 extent{0.0, 0.0, 0.0};
  for (const auto& p : geom.mic_positions)
    for (int k = 0; k < 3; ++k) extent[k] = std::max(extent[k], std::abs(p[k] - centroid[k]));

  std::vector<ScenarioItem> items;
  items.reserve(r.sir_grid.size() * static_cast<std::size_t>(count_per_sir));
  std::uint64_t index = 0;
  for (double sir : r.sir_grid) {
    for (int k = 0; k < count_per_sir; ++k, ++index) {
      Rng rng(derive_seed(seed, index, kStreamScene));
      ScenarioItem item;
      char id[32];
      std::snprintf(id, sizeof id, "utt%05llu", static_cast<unsigned long long>(index));
      item.id = id;
      item.condition = sir_condition_label(sir);
      item.seed = derive_seed(seed, index, kStreamSignals);

      bool placed = false;
      for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
        RoomScenario sc;
        sc.geometry = geom;
        sc.sir_db = sir;
        for (int a = 0; a < 3; ++a) sc.room_dims[a] = rng.uniform(r.room_min[a], r.room_max[a]);
        sc.rt60 = rng.uniform(r.rt60_min, r.rt60_max);
        for (int a = 0; a < 2; ++a) {
          const double lo = r.wall_margin_m + extent[a];
          sc.array_center[a] = rng.uniform(lo, sc.room_dims[a] - lo);
        }
        const double z_lo = std::min(1.0, 0.5 * sc.room_dims[2]);
        const double z_hi = std::max(z_lo, std::min(1.8, sc.room_dims[2] - r.wall_margin_m - extent[2]));
        sc.array_center[2] = rng.uniform(z_lo, z_hi);
        sc.target_azimuth_deg = rng.uniform(r.azimuth_min, r.azimuth_max);
        sc.target_distance_m = rng.uniform(r.distance_min, r.distance_max);
        sc.interference_azimuth_deg = rng.uniform(r.azimuth_min, r.azimuth_max);
        sc.interference_distance_m = rng.uniform(r.distance_min, r.distance_max);
        if (std::abs(sc.interference_azimuth_deg - sc.target_azimuth_deg) < r.min_separation_deg) continue;

        bool ok = inside_with_margin(sc.room_dims, sc.target_position(), r.wall_margin_m) &&
                  inside_with_margin(sc.room_dims, sc.interference_position(), r.wall_margin_m);
        for (const auto& p : sc.mic_positions()) ok = ok && inside_with_margin(sc.room_dims, p, r.wall_margin_m);
        if (!ok) continue;
        item.scenario = sc;
        placed = true;
      }
      if (!placed) throw ConfigError("sample_scenarios: no valid placement found for " + item.id);
      items.push_back(std::move(item));
    }
  }
  return items;
}

json scenario_to_json(const RoomScenario& sc) {
  json mics = json::array();
  for (const auto& p : sc.geometry.mic_positions) mics.push_back(vec3_json(p));
  return {{"room_dims", vec3_json(sc.room_dims)},
          {"rt60", sc.rt60},
          {"array_center", vec3_json(sc.array_center)},
          {"mic_positions", mics},
          {"speed_of_sound", sc.geometry.speed_of_sound},
          {"target", {{"azimuth_deg", sc.target_azimuth_deg},
                      {"distance_m", sc.target_distance_m},
                      {"position", vec3_json(sc.target_position())}}},
          {"interference", {{"azimuth_deg", sc.interference_azimuth_deg},
                            {"distance_m", sc.interference_distance_m},
                            {"position", vec3_json(sc.interference_position())}}},
          {"sir_db", sc.sir_db},
          {"delay_mode", sc.delay_mode == DelayMode::Fractional ? "fractional" : "nearest"}};
}

RoomScenario scenario_from_json(const json& j) {
  try {
    RoomScenario sc;
    sc.room_dims = vec3_from(j, "room_dims");
    sc.rt60 = j.at("rt60").get<double>();
    sc.array_center = vec3_from(j, "array_center");
    for (const auto& p : j.at("mic_positions")) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("scenario.mic_positions: expected 3 numbers per mic");
      sc.geometry.mic_positions.push_back({v[0], v[1], v[2]});
    }
    sc.geometry.speed_of_sound = j.at("speed_of_sound").get<double>();
    sc.target_azimuth_deg = j.at("target").at("azimuth_deg").get<double>();
    sc.target_distance_m = j.at("target").at("distance_m").get<double>();
    sc.interference_azimuth_deg = j.at("interference").at("azimuth_deg").get<double>();
    sc.interference_distance_m = j.at("interference").at("distance_m").get<double>();
    sc.sir_db = j.at("sir_db").get<double>();
    const auto mode = j.value("delay_mode", std::string("fractional"));
    if (mode != "fractional" && mode != "nearest")
      throw ConfigError("scenario.delay_mode must be 'fractional' or 'nearest'");
    sc.delay_mode = mode == "nearest" ? DelayMode::Nearest : DelayMode::Fractional;
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

DrySignals dry_signals_for(const ScenarioItem& item, const ExperimentConfig& cfg) {
  const int fs = cfg.stft.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::lround(cfg.scenario.duration_s * fs));
  Rng target_rng(derive_seed(item.seed, 0));
  Rng noise_rng(derive_seed(item.seed, 1));
  DrySignals dry;
  dry.target = cfg.scenario.speech_dir.empty() ? synth_speech(target_rng, n, fs)
                                               : pool_slice(cfg.scenario.speech_dir, target_rng, n, fs);
  dry.interference = cfg.scenario.noise_dir.empty()
                         ? synth_noise(parse_noise_kind(cfg.scenario.interference), noise_rng, n, fs)
                         : pool_slice(cfg.scenario.noise_dir, noise_rng, n, fs);
  return dry;
}

json DatasetManifest::to_json() const {
  json list = json::array();
  for (const auto& e : entries)
    list.push_back({{"id", e.id},
                    {"condition", e.condition},
                    {"sir_db", e.sir_db},
                    {"scenario", e.scenario},
                    {"mixture", e.mixture},
                    {"target_direct", e.target_direct},
                    {"target_reverb", e.target_reverb},
                    {"sha256", e.sha256}});
  return {{"format", "nbf-manifest-1"}, {"seed", seed}, {"entries", list}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "nbf-manifest-1") throw ConfigError("manifest: unknown format");
    DatasetManifest m;
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      ManifestEntry me;
      me.id = e.at("id").get<std::string>();
      me.condition = e.at("condition").get<std::string>();
      me.sir_db = e.at("sir_db").get<double>();
      me.scenario = e.at("scenario").get<std::string>();
      me.mixture = e.at("mixture").get<std::string>();
      me.target_direct = e.at("target_direct").get<std::string>();
      me.target_reverb = e.at("target_reverb").get<std::string>();
      me.sha256 = e.at("sha256").get<std::map<std::string, std::string>>();
      m.entries.push_back(std::move(me));
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  write_file_atomic(path, m.to_json().dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return DatasetManifest::from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void verify_manifest(const DatasetManifest& m, const std::filesystem::path& root) {
  for (const auto& e : m.entries) {
    for (const auto* rel : {&e.scenario, &e.mixture, &e.target_direct, &e.target_reverb}) {
      const auto path = root / *rel;
      if (!std::filesystem::exists(path)) throw IoError("manifest entry " + e.id + ": missing " + path.string());
      const auto it = e.sha256.find(*rel);
      if (it != e.sha256.end() && it->second != sha256_hex(read_file(path)))
        throw IoError("manifest entry " + e.id + ": digest mismatch for " + path.string());
    }
  }
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace nbf
