#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace fbench {

// Writes to a sibling temporary and renames over `path`, so readers never see
// a half-written file and a failed write leaves nothing behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace fbench
