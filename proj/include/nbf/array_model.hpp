#pragma once

#include <array>
#include <vector>

#include "nbf/fft.hpp"
#include "nbf/stft.hpp"

namespace nbf {

using Vec3 = std::array<double, 3>;

inline constexpr double kDefaultSpeedOfSound = 343.0;

/// Microphone positions in meters and the propagation speed.
struct ArrayGeometry {
  std::vector<Vec3> mic_positions;
  double speed_of_sound = kDefaultSpeedOfSound;

  std::size_t num_mics() const { return mic_positions.size(); }
  Vec3 centroid() const;
  /// Euclidean distance l_ij.
  double distance(std::size_t i, std::size_t j) const;
  /// Throws std::invalid_argument for an empty or non-finite geometry.
  void validate() const;
};

/// Azimuth in degrees, measured in the x-y plane from the +x axis.
/// For a ULA laid out along +x: 0 = endfire towards increasing mic index,
/// 90 = broadside, 180 = endfire towards mic 0.
struct Doa {
  double azimuth_deg = 90.0;

  explicit Doa(double deg);
  Vec3 unit_vector() const;
};

/// Collinear array along x, centered on the origin.
ArrayGeometry ula(int num_mics, double spacing_m, double speed_of_sound = kDefaultSpeedOfSound);

/// Far-field plane-wave delay of each microphone relative to the centroid,
/// in seconds. Positive for microphones farther from the source.
std::vector<double> relative_delays(const ArrayGeometry& geom, const Doa& doa);

/// Steering vector at a physical frequency: v_m = exp(-j 2 pi f tau_m).
std::vector<cplx> steering_vector_hz(const ArrayGeometry& geom, const Doa& doa, double freq_hz);

/// Steering vector at STFT bin `bin` (frequency f_s * bin / N).
/// Throws std::out_of_range if bin >= F.
std::vector<cplx> steering_vector(const ArrayGeometry& geom, const Doa& doa, int bin,
                                  const StftConfig& cfg);

}  // namespace nbf
