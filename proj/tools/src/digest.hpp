#pragma once

#include <filesystem>
#include <string>

namespace gridstrength::cli {

// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace gridstrength::cli
