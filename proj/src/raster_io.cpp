#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "pothole/imaging.hpp"
#include "pothole/text_io.hpp"

namespace pothole {
namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool is_pgm(const fs::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".pgm" || ext == ".pnm";
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

RawRaster read_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error(Errc::io, "cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(Errc::unsupported_format, path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(Errc::io, "libpng initialisation failed");
  }
  RawRaster out;
  std::string failure;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(failure.empty() ? Errc::io : Errc::unsupported_format,
                failure.empty() ? "corrupt PNG " + path.string() : failure);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    failure = path.string() + ": only 8- or 16-bit single-channel PNG is supported";
    png_longjmp(png, 1);
  }
  if (depth == 16) png_set_swap(png);  // native little-endian uint16 rows
  png_read_update_info(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = static_cast<int>(width);
  out.height = static_cast<int>(height);
  out.bit_depth = depth;
  out.samples.resize(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    if (depth == 8) {
      out.samples[i] = buffer[i];
    } else {
      std::uint16_t s;
      std::memcpy(&s, buffer.data() + 2 * i, 2);
      out.samples[i] = s;
    }
  }
  return out;
}

std::string encode_png(const RawRaster& raster) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, "libpng initialisation failed");
  }
  std::string bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, "PNG encoding failed");
  }
  png_set_write_fn(
      png, &bytes,
      [](png_structp p, png_bytep data, png_size_t len) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width), static_cast<png_uint_32>(raster.height),
               raster.bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t bpp = raster.bit_depth == 16 ? 2 : 1;
  std::vector<png_byte> row(static_cast<std::size_t>(raster.width) * bpp);
  for (int v = 0; v < raster.height; ++v) {
    for (int u = 0; u < raster.width; ++u) {
      const std::uint16_t s = raster.samples[static_cast<std::size_t>(v) * raster.width + u];
      if (bpp == 1) {
        row[u] = static_cast<png_byte>(s);
      } else {
        row[2 * u] = static_cast<png_byte>(s >> 8);  // PNG is big-endian
        row[2 * u + 1] = static_cast<png_byte>(s & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

RawRaster read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    return t;
  };
  if (token() != "P5") throw Error(Errc::unsupported_format, path.string() + " is not a binary PGM");
  RawRaster out;
  long maxval = 0;
  try {
    out.width = std::stoi(token());
    out.height = std::stoi(token());
    maxval = std::stol(token());
  } catch (const std::exception&) {
    throw Error(Errc::unsupported_format, "malformed PGM header in " + path.string());
  }
  if (maxval <= 0 || maxval > 65535) throw Error(Errc::unsupported_format, "unsupported PGM maxval");
  if (out.width <= 0 || out.height <= 0) throw Error(Errc::unsupported_format, "zero-sized image " + path.string());
  out.bit_depth = maxval < 256 ? 8 : 16;
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height;
  const std::size_t bpp = out.bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> data(n * bpp);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()))) {
    throw Error(Errc::io, "truncated PGM " + path.string());
  }
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = bpp == 1 ? data[i] : static_cast<std::uint16_t>(data[2 * i] << 8 | data[2 * i + 1]);
  }
  return out;
}

std::string encode_pgm(const RawRaster& raster) {
  std::ostringstream os;
  os << "P5\n" << raster.width << ' ' << raster.height << '\n' << (raster.bit_depth == 16 ? 65535 : 255) << '\n';
  std::string bytes = os.str();
  for (std::uint16_t s : raster.samples) {
    if (raster.bit_depth == 16) bytes.push_back(static_cast<char>(s >> 8));
    bytes.push_back(static_cast<char>(s & 0xff));
  }
  return bytes;
}

}  // namespace

RawRaster read_raster(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::io, "cannot read " + path.string());
  RawRaster r = is_pgm(path) ? read_pgm(path) : read_png(path);
  if (r.width <= 0 || r.height <= 0) throw Error(Errc::unsupported_format, "zero-sized image " + path.string());
  return r;
}

void write_raster(const fs::path& path, const RawRaster& raster) {
  if (raster.bit_depth != 8 && raster.bit_depth != 16) {
    throw Error(Errc::unsupported_format, "raster bit depth must be 8 or 16");
  }
  if (raster.width <= 0 || raster.height <= 0 ||
      raster.samples.size() != static_cast<std::size_t>(raster.width) * raster.height) {
    throw Error(Errc::invalid_argument, "raster dimensions do not match its samples");
  }
  write_file_atomic(path, is_pgm(path) ? encode_pgm(raster) : encode_png(raster));
}

DisparityImage load_disparity(const fs::path& path, std::optional<double> scale, std::uint16_t invalid_value) {
  const RawRaster raw = read_raster(path);
  const double divisor = scale.value_or(raw.bit_depth == 16 ? 256.0 : 1.0);
  if (!(divisor > 0.0) || !std::isfinite(divisor)) throw Error(Errc::invalid_argument, "disparity scale must be positive");
  GrayImage values(raw.width, raw.height, 0.0);
  BinaryMask valid(raw.width, raw.height, 0);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    if (raw.samples[i] == invalid_value) continue;
    values[i] = static_cast<double>(raw.samples[i]) / divisor;
    valid[i] = 1;
  }
  return DisparityImage(std::move(values), std::move(valid));
}

void save_disparity(const DisparityImage& disp, const fs::path& path, double scale) {
  if (!(scale > 0.0)) throw Error(Errc::invalid_argument, "disparity scale must be positive");
  RawRaster raw{disp.width(), disp.height(), 16, std::vector<std::uint16_t>(disp.size(), 0)};
  const auto& values = disp.values();
  const auto& valid = disp.validity();
  for (std::size_t i = 0; i < disp.size(); ++i) {
    if (valid[i] == 0) continue;
    raw.samples[i] = static_cast<std::uint16_t>(std::clamp(std::lround(values[i] * scale), 1L, 65535L));
  }
  write_raster(path, raw);
}

void save_mask(const BinaryMask& mask, const fs::path& path) {
  RawRaster raw{mask.width(), mask.height(), 8, std::vector<std::uint16_t>(mask.size(), 0)};
  for (std::size_t i = 0; i < mask.size(); ++i) raw.samples[i] = mask[i] != 0 ? 255 : 0;
  write_raster(path, raw);
}

void save_mask(const DamageMask& mask, const fs::path& path) { save_mask(mask.damaged, path); }

BinaryMask load_mask(const fs::path& path) {
  const RawRaster raw = read_raster(path);
  BinaryMask mask(raw.width, raw.height, 0);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) mask[i] = raw.samples[i] != 0 ? 1 : 0;
  return mask;
}

}  // namespace pothole
