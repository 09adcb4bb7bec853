#pragma once

#include <filesystem>
#include <string>

namespace osmcaa {

// Writes content to a sibling temp file and renames it into place, so a
// crash never leaves a partially written output at the target path.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace osmcaa
