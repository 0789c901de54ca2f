#pragma once

// Optional PNG export through libpng. The metadata goes into a tEXt chunk
// with keyword "siegel-meta". Include only from targets that link libpng.

#include <png.h>

#include <cstdint>
#include <string>
#include <vector>

#include "siegel/error.hpp"
#include "siegel/render.hpp"

namespace siegel {

inline std::string encode_png(const RasterImage& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: cannot create writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: cannot create info");
  }
  std::string out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        static_cast<std::string*>(png_get_io_ptr(p))->append(reinterpret_cast<const char*>(data), len);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width_px), static_cast<png_uint_32>(img.height_px), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::string key = "siegel-meta";
  std::string text = img.meta.dump(-1, ' ', true);
  png_text chunk{};
  chunk.compression = PNG_TEXT_COMPRESSION_NONE;
  chunk.key = key.data();
  chunk.text = text.data();
  chunk.text_length = text.size();
  png_set_text(png, info, &chunk, 1);
  png_write_info(png, info);
  std::vector<png_bytep> rows(img.height_px);
  for (int j = 0; j < img.height_px; ++j)
    rows[j] = const_cast<png_bytep>(img.pixels.data() + std::size_t(j) * img.width_px * 3);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline void write_png(const std::filesystem::path& path, const RasterImage& img) {
  write_file_atomic(path, encode_png(img));
}

}  // namespace siegel
