#pragma once

#include <filesystem>
#include <string_view>

namespace nbf {

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
/// Creates parent directories. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Reads a whole file. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace nbf
