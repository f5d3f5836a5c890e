#include "nbf/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

#include "nbf/atomic_file.hpp"

namespace nbf {

namespace {

static_assert(std::endian::native == std::endian::little, "NBF1 I/O assumes a little-endian host");

constexpr char kMagic[4] = {'N', 'B', 'F', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  char raw[4];
  std::memcpy(raw, &v, 4);
  out.append(raw, 4);
}

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

}  // namespace

ComplexTensor::ComplexTensor(std::vector<std::uint32_t> shape)
    : dims(std::move(shape)), data(element_count(dims)) {}

std::string shape_string(const std::vector<std::uint32_t>& dims) {
  std::string s;
  for (auto d : dims) s += "[" + std::to_string(d) + "]";
  return s;
}

std::string encode_nbf1(const ComplexTensor& t) {
  if (element_count(t.dims) != t.data.size())
    throw std::invalid_argument("encode_nbf1: dims do not match payload size");
  std::string out;
  out.reserve(4 + 4 * (t.dims.size() + 2) + 8 * t.data.size());
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  put_u32(out, kDtypeComplex64);
  const auto* raw = reinterpret_cast<const char*>(t.data.data());
  out.append(raw, t.data.size() * sizeof(std::complex<float>));
  return out;
}

ComplexTensor decode_nbf1(std::string_view bytes) {
  std::size_t pos = 0;
  auto u32 = [&]() {
    if (pos + 4 > bytes.size()) throw std::invalid_argument("NBF1: truncated header");
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    pos += 4;
    return v;
  };
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw std::invalid_argument("NBF1: bad magic");
  pos = 4;
  const std::uint32_t rank = u32();
  if (rank > 16) throw std::invalid_argument("NBF1: implausible rank " + std::to_string(rank));
  ComplexTensor t;
  t.dims.resize(rank);
  for (auto& d : t.dims) d = u32();
  const std::uint32_t dtype = u32();
  if (dtype != kDtypeComplex64)
    throw std::invalid_argument("NBF1: unsupported dtype code " + std::to_string(dtype));
  const std::size_t n = element_count(t.dims);
  if (bytes.size() - pos != n * sizeof(std::complex<float>))
    throw std::invalid_argument("NBF1: payload size does not match header " + shape_string(t.dims));
  t.data.resize(n);
  std::memcpy(t.data.data(), bytes.data() + pos, n * sizeof(std::complex<float>));
  return t;
}

void write_nbf1(const std::filesystem::path& path, const ComplexTensor& t) {
  write_file_atomic(path, encode_nbf1(t));
}

ComplexTensor read_nbf1(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_nbf1(bytes);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

ComplexTensor planes_to_tensor(const std::vector<Spectrogram>& planes) {
  if (planes.empty()) throw std::invalid_argument("planes_to_tensor: no planes");
  const auto& first = planes.front();
  ComplexTensor t({static_cast<std::uint32_t>(planes.size()), static_cast<std::uint32_t>(first.num_frames),
                   static_cast<std::uint32_t>(first.num_bins)});
  std::size_t k = 0;
  for (const auto& p : planes) {
    if (!p.same_shape(first)) throw std::invalid_argument("planes_to_tensor: ragged planes");
    for (const auto& v : p.data) t.data[k++] = std::complex<float>(v);
  }
  return t;
}

ComplexTensor plane_to_tensor(const Spectrogram& plane) {
  ComplexTensor t({static_cast<std::uint32_t>(plane.num_frames), static_cast<std::uint32_t>(plane.num_bins)});
  for (std::size_t i = 0; i < plane.data.size(); ++i) t.data[i] = std::complex<float>(plane.data[i]);
  return t;
}

std::vector<Spectrogram> tensor_to_planes(const ComplexTensor& t) {
  if (t.dims.size() != 3) throw std::invalid_argument("expected a rank-3 tensor, got " + shape_string(t.dims));
  std::vector<Spectrogram> planes(t.dims[0], Spectrogram(t.dims[1], t.dims[2]));
  std::size_t k = 0;
  for (auto& p : planes)
    for (auto& v : p.data) v = cplx(t.data[k++]);
  return planes;
}

Spectrogram tensor_to_plane(const ComplexTensor& t) {
  if (t.dims.size() != 2) throw std::invalid_argument("expected a rank-2 tensor, got " + shape_string(t.dims));
  Spectrogram p(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < p.data.size(); ++i) p.data[i] = cplx(t.data[i]);
  return p;
}

}  // namespace nbf
