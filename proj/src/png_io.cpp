#include <png.h>

#include <cstring>

#include <fmt/core.h>

#include "gridloc/data_io.hpp"
#include "gridloc/error.hpp"

namespace gridloc {

GrayImage read_png_gray(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw DataError(fmt::format("{}: unreadable PNG ({})", path.string(), img.message));
  if ((img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA)) != 0) {
    png_image_free(&img);
    throw DataError(fmt::format("{}: expected 8-bit grayscale PNG", path.string()));
  }
  img.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.height = static_cast<int>(img.height);
  out.width = static_cast<int>(img.width);
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr))
    throw DataError(fmt::format("{}: PNG decode failed ({})", path.string(), img.message));
  return out;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr))
    throw ConfigError(fmt::format("{}: cannot write PNG ({})", path.string(), img.message));
}

}  // namespace gridloc
