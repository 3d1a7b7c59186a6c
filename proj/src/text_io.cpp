#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pothole/error.hpp"
#include "pothole/text_io.hpp"

namespace pothole {
namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io, "cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double value) {
  // 17 significant digits in scientific form: always round-trips.
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.16e", value);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::invalid_argument, "line " + std::to_string(line_no) + ": expected `key = value`");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::invalid_argument, "line " + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

double parse_double(std::string_view key, const std::string& value) {
  double out = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw Error(Errc::invalid_argument, std::string(key) + ": not a number: " + value);
  }
  return out;
}

long long parse_integer(std::string_view key, const std::string& value) {
  long long out = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw Error(Errc::invalid_argument, std::string(key) + ": not an integer: " + value);
  }
  return out;
}

}  // namespace pothole
