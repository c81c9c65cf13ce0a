#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace msport {

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace msport
