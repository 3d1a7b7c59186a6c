#pragma once

// Plain-text sidecars: `key = value` lines with `#` comments, and
// round-trippable number formatting.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pothole {

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Scientific notation with 17 significant digits; parses back bit-exact.
std::string format_double(double value);

/// Parses `key = value` lines. Blank lines and text after `#` are ignored.
/// Later duplicates override earlier ones.
std::map<std::string, std::string> parse_key_values(std::string_view text);

double parse_double(std::string_view key, const std::string& value);
long long parse_integer(std::string_view key, const std::string& value);

}  // namespace pothole
