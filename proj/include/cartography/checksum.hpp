#pragma once

#include <filesystem>
#include <string>

namespace cartography {

// Lowercase hex SHA-256 of a file's bytes. Throws IngestError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cartography
