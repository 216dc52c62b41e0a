#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace surfwave {

/// Writes `content` to `<path>.tmp` and renames it over `path`, so readers
/// never observe a half-written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

}  // namespace surfwave
