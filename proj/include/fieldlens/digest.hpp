#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "fieldlens/result.hpp"

namespace fieldlens {

/// Lower-case hex SHA-256 of a byte range.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(std::string_view bytes);
Result<std::string> sha256_file(const std::filesystem::path& path);

/// Hex string of `n_bytes` bytes from the system CSPRNG.
std::string random_hex(std::size_t n_bytes);

}  // namespace fieldlens
