#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace atlas {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
// Throws ConfigError when the file cannot be read.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace atlas
