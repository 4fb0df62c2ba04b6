#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace jamflow {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(std::filesystem::path const& path);

}  // namespace jamflow
