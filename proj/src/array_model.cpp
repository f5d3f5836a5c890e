#include "nbf/array_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nbf {

Vec3 ArrayGeometry::centroid() const {
  Vec3 c{0.0, 0.0, 0.0};
  if (mic_positions.empty()) return c;
  for (const auto& p : mic_positions)
    for (int k = 0; k < 3; ++k) c[k] += p[k];
  for (auto& v : c) v /= static_cast<double>(mic_positions.size());
  return c;
}

double ArrayGeometry::distance(std::size_t i, std::size_t j) const {
  const auto& a = mic_positions.at(i);
  const auto& b = mic_positions.at(j);
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

void ArrayGeometry::validate() const {
  if (mic_positions.empty()) throw std::invalid_argument("ArrayGeometry: no microphones");
  for (const auto& p : mic_positions)
    for (double v : p)
      if (!std::isfinite(v)) throw std::invalid_argument("ArrayGeometry: non-finite position");
  if (!(speed_of_sound > 0.0) || !std::isfinite(speed_of_sound))
    throw std::invalid_argument("ArrayGeometry: speed of sound must be positive");
  // Coincident mics duplicate a row of the coherence matrix.
  for (std::size_t i = 0; i < mic_positions.size(); ++i)
    for (std::size_t j = i + 1; j < mic_positions.size(); ++j)
      if (distance(i, j) == 0.0)
        throw std::invalid_argument("ArrayGeometry: microphones " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide");
}

Doa::Doa(double deg) : azimuth_deg(deg) {
  if (!(deg >= 0.0 && deg <= 180.0))
    throw std::invalid_argument("Doa: azimuth must lie in [0, 180] degrees, got " + std::to_string(deg));
}

Vec3 Doa::unit_vector() const {
  // Exact values on the axes keep broadside/endfire phasors exactly 1.
  if (azimuth_deg == 0.0) return {1.0, 0.0, 0.0};
  if (azimuth_deg == 90.0) return {0.0, 1.0, 0.0};
  if (azimuth_deg == 180.0) return {-1.0, 0.0, 0.0};
  const double rad = azimuth_deg * M_PI / 180.0;
  return {std::cos(rad), std::sin(rad), 0.0};
}

ArrayGeometry ula(int num_mics, double spacing_m, double speed_of_sound) {
  if (num_mics < 1) throw std::invalid_argument("ula: need at least one microphone");
  if (!(spacing_m > 0.0)) throw std::invalid_argument("ula: spacing must be positive");
  ArrayGeometry g;
  g.speed_of_sound = speed_of_sound;
  const double mid = 0.5 * (num_mics - 1);
  for (int m = 0; m < num_mics; ++m) g.mic_positions.push_back({(m - mid) * spacing_m, 0.0, 0.0});
  g.validate();
  return g;
}

std::vector<double> relative_delays(const ArrayGeometry& geom, const Doa& doa) {
  const Vec3 c = geom.centroid();
  const Vec3 u = doa.unit_vector();
  std::vector<double> tau(geom.num_mics());
  for (std::size_t m = 0; m < tau.size(); ++m) {
    const auto& p = geom.mic_positions[m];
    const double proj = (p[0] - c[0]) * u[0] + (p[1] - c[1]) * u[1] + (p[2] - c[2]) * u[2];
    tau[m] = -proj / geom.speed_of_sound;
  }
  return tau;
}

std::vector<cplx> steering_vector_hz(const ArrayGeometry& geom, const Doa& doa, double freq_hz) {
  const auto tau = relative_delays(geom, doa);
  std::vector<cplx> v(tau.size());
  for (std::size_t m = 0; m < tau.size(); ++m) v[m] = std::polar(1.0, -2.0 * M_PI * freq_hz * tau[m]);
  return v;
}

std::vector<cplx> steering_vector(const ArrayGeometry& geom, const Doa& doa, int bin,
                                  const StftConfig& cfg) {
  if (bin < 0 || bin >= cfg.num_bins())
    throw std::out_of_range("steering_vector: bin " + std::to_string(bin) + " out of range");
  return steering_vector_hz(geom, doa, cfg.bin_frequency_hz(bin));
}

}  // namespace nbf
