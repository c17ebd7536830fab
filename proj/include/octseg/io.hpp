#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "octseg/image.hpp"
#include "octseg/segmentation.hpp"

namespace octseg::io {

namespace fs = std::filesystem;

/// Decoded 8-bit raster, one or three channels, interleaved.
struct Bitmap {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;
};

namespace detail {

using octseg::detail::fail;

inline std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

inline std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Bitmap read_png(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail(ErrorKind::Parse, path.string() + ": " + image.message);
  Bitmap bm;
  bm.channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = bm.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  bm.width = static_cast<int>(image.width);
  bm.height = static_cast<int>(image.height);
  bm.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, bm.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorKind::Parse, path.string() + ": " + msg);
  }
  return bm;
}

inline void write_png(const fs::path& path, const Bitmap& bm) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(bm.width);
  image.height = static_cast<png_uint_32>(bm.height);
  image.format = bm.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, bm.data.data(), 0, nullptr))
    fail(ErrorKind::Io, "cannot write " + path.string() + ": " + image.message);
}

// Netpbm header token, skipping whitespace and '#' comments.
inline unsigned pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos, const std::string& name) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= b.size() || !std::isdigit(b[pos])) fail(ErrorKind::Parse, name + ": malformed PGM header");
  unsigned long v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos++] - '0');
    if (v > 1u << 24) fail(ErrorKind::Parse, name + ": PGM value out of range");
  }
  return static_cast<unsigned>(v);
}

inline GrayImage read_pgm(const fs::path& path) {
  const std::vector<std::uint8_t> b = read_file(path);
  const std::string name = path.string();
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '2' && b[1] != '5'))
    fail(ErrorKind::Parse, name + ": not a P2/P5 PGM file");
  const bool ascii = b[1] == '2';
  std::size_t pos = 2;
  const int w = static_cast<int>(pnm_token(b, pos, name));
  const int h = static_cast<int>(pnm_token(b, pos, name));
  const unsigned maxval = pnm_token(b, pos, name);
  if (w <= 0 || h <= 0 || maxval == 0 || maxval > 65535) fail(ErrorKind::Parse, name + ": bad PGM header");
  GrayImage img(w, h);
  auto px = img.pixels();
  if (ascii) {
    for (double& v : px) {
      const unsigned s = pnm_token(b, pos, name);
      if (s > maxval) fail(ErrorKind::Parse, name + ": sample exceeds maxval");
      v = static_cast<double>(s) / maxval;
    }
    return img;
  }
  ++pos;  // single whitespace after maxval
  const std::size_t bps = maxval > 255 ? 2 : 1;
  if (b.size() < pos + px.size() * bps) fail(ErrorKind::Parse, name + ": truncated PGM data");
  for (std::size_t i = 0; i < px.size(); ++i) {
    unsigned s = b[pos + i * bps];
    if (bps == 2) s = s << 8 | b[pos + i * bps + 1];
    if (s > maxval) fail(ErrorKind::Parse, name + ": sample exceeds maxval");
    px[i] = static_cast<double>(s) / maxval;
  }
  return img;
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline bool is_pgm(const fs::path& p) {
  const std::string ext = lower_extension(p);
  return ext == ".pgm" || ext == ".pnm";
}

inline void write_pgm(const fs::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (double v : img.pixels()) out.put(static_cast<char>(to_byte(v)));
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

}  // namespace detail

/// Any supported scan file as grayscale in [0,1]. RGB is converted to luma;
/// alpha is dropped.
inline GrayImage read_scan(const fs::path& path) {
  if (detail::is_pgm(path)) return detail::read_pgm(path);
  const Bitmap bm = detail::read_png(path);
  if (bm.channels == 1) {
    GrayImage img(bm.width, bm.height);
    auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = bm.data[i] / 255.0;
    return img;
  }
  RgbImage rgb(bm.width, bm.height);
  for (int y = 0; y < bm.height; ++y)
    for (int x = 0; x < bm.width; ++x) {
      const std::size_t i = 3 * (static_cast<std::size_t>(y) * bm.width + x);
      rgb.set(x, y, bm.data[i] / 255.0, bm.data[i + 1] / 255.0, bm.data[i + 2] / 255.0);
    }
  return to_grayscale(rgb);
}

/// 8-bit single-channel PNG (or PGM) holding class ids 0..3.
inline LabelMask read_mask(const fs::path& path) {
  LabelMask mask;
  if (detail::is_pgm(path)) {
    const GrayImage g = detail::read_pgm(path);
    mask = LabelMask(g.size());
    auto src = g.pixels();
    auto dst = mask.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<std::uint8_t>(std::lround(src[i] * 255.0));
  } else {
    const Bitmap bm = detail::read_png(path);
    if (bm.channels != 1) detail::fail(ErrorKind::Parse, path.string() + ": mask must be single-channel");
    mask = LabelMask(bm.width, bm.height, bm.data);
  }
  if (!valid_labels(mask)) detail::fail(ErrorKind::Parse, path.string() + ": mask values must lie in 0..3");
  return mask;
}

inline void write_gray(const fs::path& path, const GrayImage& img) {
  if (detail::is_pgm(path)) return detail::write_pgm(path, img);
  Bitmap bm{img.width(), img.height(), 1, {}};
  bm.data.reserve(img.size().area());
  for (double v : img.pixels()) bm.data.push_back(detail::to_byte(v));
  detail::write_png(path, bm);
}

inline void write_mask(const fs::path& path, const LabelMask& mask) {
  octseg::detail::require(valid_labels(mask), ErrorKind::Parameter, "mask values must lie in 0..3");
  Bitmap bm{mask.width(), mask.height(), 1, {mask.pixels().begin(), mask.pixels().end()}};
  detail::write_png(path, bm);
}

inline void write_rgb(const fs::path& path, const RgbImage& img) {
  Bitmap bm{img.red.width(), img.red.height(), 3, {}};
  bm.data.reserve(3 * img.red.size().area());
  for (int y = 0; y < bm.height; ++y)
    for (int x = 0; x < bm.width; ++x) {
      bm.data.push_back(detail::to_byte(img.red.at(x, y)));
      bm.data.push_back(detail::to_byte(img.green.at(x, y)));
      bm.data.push_back(detail::to_byte(img.blue.at(x, y)));
    }
  detail::write_png(path, bm);
}

}  // namespace octseg::io
