#pragma once

#include <span>
#include <vector>

#include "nbf/array_model.hpp"

namespace nbf {

/// Uniform wall reflection coefficient from Eyring's reverberation formula,
///   rt60 = 24 ln(10) V / (-c S ln(1 - alpha)),  beta = sqrt(1 - alpha),
/// i.e. beta = exp(-12 ln(10) V / (c S rt60)). rt60 <= 0 means anechoic
/// (beta = 0). Throws std::invalid_argument when beta would exceed 0.9999.
double rt60_to_reflection(const Vec3& room_dims, double rt60,
                          double speed_of_sound = kDefaultSpeedOfSound);

/// Reflection coefficient under which the image method itself decays with the
/// requested rt60. Eyring assumes a diffuse field; in a shoebox the image
/// lattice is not diffuse and directions crossing few walls dominate the late
/// tail, so Eyring's coefficient overshoots rt60 (by roughly 25% in a
/// 6 x 5 x 3 m room). This inverts the direction-averaged image-lattice decay
///   E(t) = mean_u beta^(2 c t sum_k |u_k| / L_k)
/// with the same Schroeder fit as schroeder_rt60(). rt60 <= 0 gives 0.
/// Throws std::invalid_argument when beta would exceed 0.9999.
double shoebox_reflection(const Vec3& room_dims, double rt60,
                          double speed_of_sound = kDefaultSpeedOfSound);

/// Allen-Berkley DC-removal high-pass (two poles at `cutoff_hz`), in place.
/// All image amplitudes share one sign, so without it the dense tail builds
/// a low-frequency offset that inflates late energy.
void highpass_rir(std::vector<double>& h, int sample_rate_hz, double cutoff_hz = 100.0);

/// How an image's arrival time maps onto the sample grid.
///   Nearest:    one impulse at round(distance / c * fs).
///   Fractional: Hann-windowed sinc of 2 * kFractionalHalfWidth + 1 taps
///               centred on the exact arrival time (keeps inter-mic phase).
enum class DelayMode { Nearest, Fractional };
inline constexpr int kFractionalHalfWidth = 32;

/// Allen-Berkley image method for a shoebox room with uniform reflection
/// coefficient `beta`. Every image within `length` samples contributes an
/// impulse of amplitude beta^(number of reflections) / (4 pi distance) at its
/// arrival time. Throws std::invalid_argument when the source or microphone is
/// not strictly inside the room.
std::vector<double> image_method_rir(const Vec3& room_dims, double beta, const Vec3& source,
                                     const Vec3& mic, std::size_t length, int sample_rate_hz,
                                     double speed_of_sound = kDefaultSpeedOfSound,
                                     DelayMode mode = DelayMode::Nearest);

/// Direct path only: a single impulse of 1/(4 pi d) at d / c.
std::vector<double> direct_path_rir(const Vec3& source, const Vec3& mic, std::size_t length,
                                    int sample_rate_hz, double speed_of_sound = kDefaultSpeedOfSound,
                                    DelayMode mode = DelayMode::Nearest);

/// RIR length covering the longest direct path plus rt60 (the time the tail
/// needs to decay by 60 dB), capped at `max_length_s`.
std::size_t rir_length_for(double rt60, double max_direct_distance_m, int sample_rate_hz,
                           double speed_of_sound = kDefaultSpeedOfSound, double max_length_s = 1.0);

/// RT60 from Schroeder backward integration: linear fit of the energy decay
/// curve between `upper_db` and `lower_db`, extrapolated to 60 dB.
double schroeder_rt60(std::span<const double> rir, int sample_rate_hz, double upper_db = -5.0,
                      double lower_db = -35.0);

/// One simulated scene. Microphone positions are array_center + the
/// geometry's (centroid-relative) positions; sources lie in the horizontal
/// plane of the array at the given azimuth and distance from array_center.
struct RoomScenario {
  Vec3 room_dims{6.0, 5.0, 3.0};
  double rt60 = 0.3;  // 0 = anechoic
  Vec3 array_center{3.0, 2.5, 1.5};
  ArrayGeometry geometry;
  double target_azimuth_deg = 90.0;
  double target_distance_m = 1.5;
  double interference_azimuth_deg = 30.0;
  double interference_distance_m = 1.5;
  double sir_db = 0.0;
  DelayMode delay_mode = DelayMode::Fractional;

  Vec3 source_position(double azimuth_deg, double distance_m) const;
  Vec3 target_position() const { return source_position(target_azimuth_deg, target_distance_m); }
  Vec3 interference_position() const {
    return source_position(interference_azimuth_deg, interference_distance_m);
  }
  std::vector<Vec3> mic_positions() const;

  /// Physical consistency: positive room, every source and microphone
  /// strictly inside, azimuths in [0, 180], rt60 >= 0.
  void validate() const;
  /// The sampling ranges of the reference experiments: rooms 3x3x2.5 to
  /// 10x10x3 m, rt60 in [0.05, 0.7] s, source distance in [0.5, 3] m.
  void validate_reference_ranges() const;
};

inline constexpr double kMaxSirDb = 60.0;

/// The simulator's RIR: shoebox_reflection(rt60), the scenario's delay mode,
/// then highpass_rir(). `direct_only` keeps the line-of-sight image alone.
std::vector<double> scenario_rir(const RoomScenario& scenario, const Vec3& source, const Vec3& mic,
                                 std::size_t length, int sample_rate_hz, bool direct_only = false);

struct Mixture {
  std::vector<std::vector<double>> mixture;             // M channels
  std::vector<std::vector<double>> target_image;        // reverberant target per mic
  std::vector<std::vector<double>> interference_image;  // scaled reverberant interference per mic
  std::vector<double> target_direct;                    // direct-path target at mic 0
  std::vector<double> target_reverb;                    // reverberant target at mic 0
  double interference_gain = 1.0;
};

/// Convolves both dry signals with their per-microphone RIRs and scales the
/// interference so that the reverberant target-to-interference power ratio
/// at microphone 0 equals sir_db (capped at 60 dB). Output length equals the
/// dry signal length. Throws std::invalid_argument for silent sources or
/// mismatched lengths.
Mixture simulate_mixture(const RoomScenario& scenario, std::span<const double> target_dry,
                         std::span<const double> interference_dry, int sample_rate_hz);

}  // namespace nbf
