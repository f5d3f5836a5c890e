#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nbf/stft.hpp"

namespace nbf {

/// Dense complex64 tensor, row-major. This is the in-memory form of the
/// NBF1 container shared by beam, weight and residual tensors.
///
/// On disk (all integers little-endian u32):
///   "NBF1" | rank | dim[0] .. dim[rank-1] | dtype | payload
/// dtype 0 = complex64, payload = interleaved float32 (re, im), row-major.
struct ComplexTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::complex<float>> data;

  ComplexTensor() = default;
  explicit ComplexTensor(std::vector<std::uint32_t> shape);

  std::size_t size() const { return data.size(); }
  bool operator==(const ComplexTensor&) const = default;
};

inline constexpr std::uint32_t kDtypeComplex64 = 0;

std::string encode_nbf1(const ComplexTensor& t);
/// Throws std::invalid_argument on malformed bytes (bad magic, unknown dtype,
/// payload size mismatch).
ComplexTensor decode_nbf1(std::string_view bytes);

void write_nbf1(const std::filesystem::path& path, const ComplexTensor& t);
ComplexTensor read_nbf1(const std::filesystem::path& path);

/// [D][T][F] stack of equally shaped planes.
ComplexTensor planes_to_tensor(const std::vector<Spectrogram>& planes);
/// [T][F] single plane.
ComplexTensor plane_to_tensor(const Spectrogram& plane);

/// Inverse of planes_to_tensor; requires rank 3.
std::vector<Spectrogram> tensor_to_planes(const ComplexTensor& t);
/// Inverse of plane_to_tensor; requires rank 2.
Spectrogram tensor_to_plane(const ComplexTensor& t);

/// Human readable "[a][b][c]".
std::string shape_string(const std::vector<std::uint32_t>& dims);

}  // namespace nbf
