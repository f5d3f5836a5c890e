#include "nbf/room_acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nbf/fft.hpp"

namespace nbf {

namespace {

bool strictly_inside(const Vec3& room, const Vec3& p) {
  for (int k = 0; k < 3; ++k)
    if (!(p[k] > 0.0 && p[k] < room[k])) return false;
  return true;
}

double dist(const Vec3& a, const Vec3& b) { return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]); }

double mean_power(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

// Image offsets along one axis: for reflection index n and parity q the
// image coordinate difference is (1 - 2q) s - r + 2 n L, reached after
// |n - q| + |n| reflections.
struct AxisImage {
  double offset;
  int order;
};

std::vector<AxisImage> axis_images(double len, double s, double r, double reach) {
  const int n_max = static_cast<int>(std::ceil(reach / (2.0 * len))) + 1;
  std::vector<AxisImage> out;
  for (int n = -n_max; n <= n_max; ++n) {
    for (int q = 0; q <= 1; ++q) {
      const double off = (1 - 2 * q) * s - r + 2.0 * n * len;
      if (std::abs(off) <= reach) out.push_back({off, std::abs(n - q) + std::abs(n)});
    }
  }
  std::sort(out.begin(), out.end(), [](const AxisImage& a, const AxisImage& b) {
    return std::abs(a.offset) < std::abs(b.offset);
  });
  return out;
}

// Adds amplitude `a` arriving at fractional sample position `pos`.
void add_arrival(std::vector<double>& h, double pos, double a, DelayMode mode) {
  const auto len = static_cast<long>(h.size());
  if (mode == DelayMode::Nearest) {
    const long k = std::lround(pos);
    if (k >= 0 && k < len) h[static_cast<std::size_t>(k)] += a;
    return;
  }
  // Taps k = first..last with x = k - pos. sin(pi x) alternates sign from tap
  // to tap and the Hann phase advances by a fixed step, so one sin and one
  // polar per arrival suffice.
  const long half = kFractionalHalfWidth;
  const long first = std::lround(pos) - half;
  const double step = M_PI / (static_cast<double>(half) + 1.0);
  const double x0 = static_cast<double>(first) - pos;
  double sin_pi_x = std::sin(M_PI * x0);
  std::complex<double> phase = std::polar(1.0, step * x0);
  const std::complex<double> rotate = std::polar(1.0, step);
  for (long k = first; k <= first + 2 * half; ++k, sin_pi_x = -sin_pi_x, phase *= rotate) {
    if (k < 0 || k >= len) continue;
    const double x = static_cast<double>(k) - pos;
    const double sinc = std::abs(x) < 1e-12 ? 1.0 : sin_pi_x / (M_PI * x);
    h[static_cast<std::size_t>(k)] += a * 0.5 * (1.0 + phase.real()) * sinc;
  }
}

// Schroeder backward integration of an energy envelope sampled every `dt`
// seconds; least-squares line through EDC(dB) in [lower_db, upper_db].
double decay_fit(std::span<const double> energy, double dt, double upper_db, double lower_db) {
  const std::size_t n = energy.size();
  std::vector<double> edc(n);
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    acc += energy[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("schroeder_rt60: silent impulse response");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (edc[i] <= 0.0) break;
    const double db = 10.0 * std::log10(edc[i] / acc);
    if (db > upper_db) continue;
    if (db < lower_db) break;
    const double t = static_cast<double>(i) * dt;
    sx += t;
    sy += db;
    sxx += t * t;
    sxy += t * db;
    ++count;
  }
  if (count < 2) throw std::invalid_argument("schroeder_rt60: decay range not reached");
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return -60.0 / slope;
}

}  // namespace

double rt60_to_reflection(const Vec3& room, double rt60, double c) {
  if (rt60 <= 0.0) return 0.0;
  const double volume = room[0] * room[1] * room[2];
  const double surface = 2.0 * (room[0] * room[1] + room[0] * room[2] + room[1] * room[2]);
  const double beta = std::exp(-12.0 * std::log(10.0) * volume / (c * surface * rt60));
  if (beta > 0.9999)
    throw std::invalid_argument("rt60_to_reflection: rt60 " + std::to_string(rt60) +
                                " s needs a reflection coefficient above 0.9999");
  return beta;
}

double shoebox_reflection(const Vec3& room, double rt60, double c) {
  if (rt60 <= 0.0) return 0.0;
  for (double v : room)
    if (!(v > 0.0)) throw std::invalid_argument("shoebox_reflection: room dimensions must be positive");
  // With s = -2 c ln(beta), E(t) = mean_u exp(-s t k_u), k_u = sum |u_k| / L_k.
  // E depends on s t only, so the fitted decay time is T1 / s where T1 is the
  // fit at s = 1.
  constexpr int kDirections = 2048;
  std::vector<double> k(kDirections);
  double k_min = 1e300;
  for (int i = 0; i < kDirections; ++i) {
    // Fibonacci sphere: near-uniform directions.
    const double z = 1.0 - (2.0 * i + 1.0) / kDirections;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = M_PI * (1.0 + std::sqrt(5.0)) * i;
    k[static_cast<std::size_t>(i)] =
        std::abs(r * std::cos(phi)) / room[0] + std::abs(r * std::sin(phi)) / room[1] + std::abs(z) / room[2];
    k_min = std::min(k_min, k[static_cast<std::size_t>(i)]);
  }
  constexpr int kSteps = 4096;
  const double horizon = 40.0 / k_min;  // every direction decayed by > 170 dB
  const double dt = horizon / kSteps;
  std::vector<double> energy(kSteps);
  for (int n = 0; n < kSteps; ++n) {
    double acc = 0.0;
    for (double kv : k) acc += std::exp(-kv * n * dt);
    energy[static_cast<std::size_t>(n)] = acc;
  }
  const double t1 = decay_fit(energy, dt, -5.0, -35.0);
  const double s = t1 / rt60;
  const double beta = std::exp(-s / (2.0 * c));
  if (beta > 0.9999)
    throw std::invalid_argument("shoebox_reflection: rt60 " + std::to_string(rt60) +
                                " s needs a reflection coefficient above 0.9999");
  return beta;
}

void highpass_rir(std::vector<double>& h, int fs, double cutoff_hz) {
  const double w = 2.0 * M_PI * cutoff_hz / fs;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& x : h) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + x;
    x = y0 + a1 * y1 + r1 * y2;
  }
}

std::vector<double> image_method_rir(const Vec3& room, double beta, const Vec3& source, const Vec3& mic,
                                     std::size_t length, int fs, double c, DelayMode mode) {
  if (!strictly_inside(room, source)) throw std::invalid_argument("image_method_rir: source outside room");
  if (!strictly_inside(room, mic)) throw std::invalid_argument("image_method_rir: microphone outside room");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("image_method_rir: beta must lie in [0, 1)");
  std::vector<double> h(length, 0.0);
  if (length == 0) return h;

  // Images beyond this distance land after the last sample.
  const double reach = (static_cast<double>(length) - 0.5) * c / fs;
  const double reach2 = reach * reach;
  const auto xs = axis_images(room[0], source[0], mic[0], reach);
  const auto ys = axis_images(room[1], source[1], mic[1], reach);
  const auto zs = axis_images(room[2], source[2], mic[2], reach);

  int max_order = 0;
  for (const auto* axis : {&xs, &ys, &zs})
    for (const auto& a : *axis) max_order = std::max(max_order, a.order);
  std::vector<double> gain(static_cast<std::size_t>(3 * max_order + 1));
  for (std::size_t k = 0; k < gain.size(); ++k) gain[k] = std::pow(beta, static_cast<double>(k));

  for (const auto& x : xs) {
    const double dx2 = x.offset * x.offset;
    if (dx2 > reach2) break;
    for (const auto& y : ys) {
      const double dxy2 = dx2 + y.offset * y.offset;
      if (dxy2 > reach2) break;
      for (const auto& z : zs) {
        const double d2 = dxy2 + z.offset * z.offset;
        if (d2 > reach2) break;
        const double g = gain[static_cast<std::size_t>(x.order + y.order + z.order)];
        if (g == 0.0) continue;
        const double d = std::sqrt(d2);
        add_arrival(h, d / c * fs, g / (4.0 * M_PI * d), mode);
      }
    }
  }
  return h;
}

std::vector<double> direct_path_rir(const Vec3& source, const Vec3& mic, std::size_t length, int fs,
                                    double c, DelayMode mode) {
  std::vector<double> h(length, 0.0);
  const double d = dist(source, mic);
  add_arrival(h, d / c * fs, 1.0 / (4.0 * M_PI * d), mode);
  return h;
}

std::size_t rir_length_for(double rt60, double max_direct_distance_m, int fs, double c, double max_length_s) {
  const double seconds = max_direct_distance_m / c + std::max(rt60, 0.0);
  const auto wanted = static_cast<std::size_t>(std::ceil(seconds * fs)) + 2;
  const auto cap = static_cast<std::size_t>(std::ceil(max_length_s * fs));
  return std::min(wanted, cap);
}

double schroeder_rt60(std::span<const double> rir, int fs, double upper_db, double lower_db) {
  std::vector<double> energy(rir.size());
  for (std::size_t i = 0; i < rir.size(); ++i) energy[i] = rir[i] * rir[i];
  return decay_fit(energy, 1.0 / fs, upper_db, lower_db);
}

Vec3 RoomScenario::source_position(double azimuth_deg, double distance_m) const {
  const Vec3 u = Doa(azimuth_deg).unit_vector();
  return {array_center[0] + distance_m * u[0], array_center[1] + distance_m * u[1],
          array_center[2] + distance_m * u[2]};
}

std::vector<Vec3> RoomScenario::mic_positions() const {
  const Vec3 c = geometry.centroid();
  std::vector<Vec3> out;
  out.reserve(geometry.num_mics());
  for (const auto& p : geometry.mic_positions)
    out.push_back({array_center[0] + p[0] - c[0], array_center[1] + p[1] - c[1], array_center[2] + p[2] - c[2]});
  return out;
}

void RoomScenario::validate() const {
  for (double v : room_dims)
    if (!(v > 0.0)) throw std::invalid_argument("RoomScenario: room dimensions must be positive");
  if (!(rt60 >= 0.0)) throw std::invalid_argument("RoomScenario: rt60 must be >= 0");
  geometry.validate();
  if (!(target_distance_m > 0.0) || !(interference_distance_m > 0.0))
    throw std::invalid_argument("RoomScenario: source distances must be positive");
  if (!strictly_inside(room_dims, target_position()))
    throw std::invalid_argument("RoomScenario: target outside the room");
  if (!strictly_inside(room_dims, interference_position()))
    throw std::invalid_argument("RoomScenario: interference outside the room");
  for (const auto& p : mic_positions())
    if (!strictly_inside(room_dims, p)) throw std::invalid_argument("RoomScenario: microphone outside the room");
}

void RoomScenario::validate_reference_ranges() const {
  validate();
  const Vec3 lo{3.0, 3.0, 2.5}, hi{10.0, 10.0, 3.0};
  for (int k = 0; k < 3; ++k)
    if (room_dims[k] < lo[k] || room_dims[k] > hi[k])
      throw std::invalid_argument("RoomScenario: room dimensions outside 3x3x2.5 .. 10x10x3 m");
  if (rt60 < 0.05 || rt60 > 0.7) throw std::invalid_argument("RoomScenario: rt60 outside [0.05, 0.7] s");
  for (double d : {target_distance_m, interference_distance_m})
    if (d < 0.5 || d > 3.0) throw std::invalid_argument("RoomScenario: source distance outside [0.5, 3] m");
}

namespace {

std::vector<double> rir_with(const RoomScenario& sc, double beta, const Vec3& source, const Vec3& mic,
                             std::size_t length, int fs, bool direct_only) {
  const double c = sc.geometry.speed_of_sound;
  auto h = direct_only ? direct_path_rir(source, mic, length, fs, c, sc.delay_mode)
                       : image_method_rir(sc.room_dims, beta, source, mic, length, fs, c, sc.delay_mode);
  highpass_rir(h, fs);
  return h;
}

}  // namespace

std::vector<double> scenario_rir(const RoomScenario& sc, const Vec3& source, const Vec3& mic, std::size_t length,
                                 int fs, bool direct_only) {
  const double beta = direct_only ? 0.0 : shoebox_reflection(sc.room_dims, sc.rt60, sc.geometry.speed_of_sound);
  return rir_with(sc, beta, source, mic, length, fs, direct_only);
}

Mixture simulate_mixture(const RoomScenario& sc, std::span<const double> target_dry,
                         std::span<const double> interference_dry, int fs) {
  sc.validate();
  if (target_dry.size() != interference_dry.size())
    throw std::invalid_argument("simulate_mixture: dry signals differ in length");
  if (mean_power(target_dry) == 0.0) throw std::invalid_argument("simulate_mixture: silent target");
  if (mean_power(interference_dry) == 0.0) throw std::invalid_argument("simulate_mixture: silent interference");

  const double c = sc.geometry.speed_of_sound;
  const double beta = shoebox_reflection(sc.room_dims, sc.rt60, c);
  const auto mics = sc.mic_positions();
  const Vec3 tpos = sc.target_position();
  const Vec3 ipos = sc.interference_position();
  double far = 0.0;
  for (const auto& m : mics) far = std::max({far, dist(m, tpos), dist(m, ipos)});
  const std::size_t len = rir_length_for(sc.rt60, far, fs, c);
  const std::size_t n = target_dry.size();

  auto convolve = [&](std::span<const double> dry, const std::vector<double>& h) {
    auto y = fft_convolve(dry, h);
    y.resize(n);
    return y;
  };

  Mixture mix;
  mix.target_image.reserve(mics.size());
  mix.interference_image.reserve(mics.size());
  for (const auto& m : mics) {
    mix.target_image.push_back(convolve(target_dry, rir_with(sc, beta, tpos, m, len, fs, false)));
    mix.interference_image.push_back(
        convolve(interference_dry, rir_with(sc, beta, ipos, m, len, fs, false)));
  }
  mix.target_reverb = mix.target_image.front();
  mix.target_direct = convolve(target_dry, rir_with(sc, beta, tpos, mics.front(), len, fs, true));

  const double pt = mean_power(mix.target_image.front());
  const double pi = mean_power(mix.interference_image.front());
  if (pt == 0.0 || pi == 0.0) throw std::invalid_argument("simulate_mixture: silent image at microphone 0");
  const double sir = std::min(sc.sir_db, kMaxSirDb);
  mix.interference_gain = std::sqrt(pt / (pi * std::pow(10.0, sir / 10.0)));
  for (auto& ch : mix.interference_image)
    for (double& v : ch) v *= mix.interference_gain;

  mix.mixture.resize(mics.size());
  for (std::size_t m = 0; m < mics.size(); ++m) {
    mix.mixture[m].resize(n);
    for (std::size_t i = 0; i < n; ++i) mix.mixture[m][i] = mix.target_image[m][i] + mix.interference_image[m][i];
  }
  return mix;
}

}  // namespace nbf
