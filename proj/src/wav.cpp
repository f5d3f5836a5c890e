#include "nbf/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "nbf/atomic_file.hpp"
#include "nbf/errors.hpp"

namespace nbf {

namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::string& buf, std::size_t pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  return v;
}

template <typename T>
void store(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

}  // namespace

Audio read_wav(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  auto fail = [&](const std::string& why) {
    return IoError("read_wav(" + path.string() + "): " + why);
  };
  if (buf.size() < 12 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_pos = 0, data_len = 0;
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id = buf.substr(pos, 4);
    const std::uint32_t len = load<std::uint32_t>(buf, pos + 4);
    const std::size_t body = pos + 8;
    if (body + len > buf.size() && id != "data") throw fail("truncated chunk " + id);
    if (id == "fmt ") {
      if (len < 16) throw fail("short fmt chunk");
      format = load<std::uint16_t>(buf, body);
      channels = load<std::uint16_t>(buf, body + 2);
      rate = load<std::uint32_t>(buf, body + 4);
      bits = load<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible) {
        if (len < 40) throw fail("short extensible fmt chunk");
        format = load<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_pos = body;
      data_len = std::min<std::size_t>(len, buf.size() - body);
      have_data = true;
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt || !have_data) throw fail("missing fmt or data chunk");
  if (channels == 0) throw fail("zero channels");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) throw fail("unsupported sample format (need 16-bit PCM or 32-bit float)");

  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * channels);
  Audio audio;
  audio.sample_rate_hz = static_cast<int>(rate);
  audio.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_pos + (i * channels + c) * width;
      audio.channels[c][i] = pcm16 ? load<std::int16_t>(buf, at) / 32768.0
                                   : static_cast<double>(load<float>(buf, at));
    }
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const Audio& audio, SampleFormat format) {
  const std::size_t channels = audio.num_channels();
  if (channels == 0) throw IoError("write_wav: no channels");
  const std::size_t frames = audio.num_samples();
  for (const auto& ch : audio.channels)
    if (ch.size() != frames) throw IoError("write_wav: channel length mismatch");

  const bool pcm16 = format == SampleFormat::Pcm16;
  const std::uint16_t width = pcm16 ? 2 : 4;
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * channels * width);
  const std::uint32_t rate = static_cast<std::uint32_t>(audio.sample_rate_hz);

  std::string buf;
  buf.reserve(44 + data_len);
  buf += "RIFF";
  store<std::uint32_t>(buf, 36 + data_len);
  buf += "WAVEfmt ";
  store<std::uint32_t>(buf, 16);
  store<std::uint16_t>(buf, pcm16 ? kFormatPcm : kFormatFloat);
  store<std::uint16_t>(buf, static_cast<std::uint16_t>(channels));
  store<std::uint32_t>(buf, rate);
  store<std::uint32_t>(buf, rate * static_cast<std::uint32_t>(channels) * width);
  store<std::uint16_t>(buf, static_cast<std::uint16_t>(channels * width));
  store<std::uint16_t>(buf, static_cast<std::uint16_t>(width * 8));
  buf += "data";
  store<std::uint32_t>(buf, data_len);
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double x = audio.channels[c][i];
      if (pcm16) {
        const long q = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
        store<std::int16_t>(buf, static_cast<std::int16_t>(q));
      } else {
        store<float>(buf, static_cast<float>(x));
      }
    }
  }
  write_file_atomic(path, buf);
}

}  // namespace nbf
