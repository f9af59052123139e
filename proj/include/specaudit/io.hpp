#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace specaudit {

/// Writes `content` to a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Whole-file read; throws ValidationError if the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

}  // namespace specaudit
