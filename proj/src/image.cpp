#include "dialkit/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "dialkit/errors.hpp"

namespace dialkit {

ImageBuffer::ImageBuffer(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw DomainError("image dimensions must be non-negative");
  data_.resize(3 * static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_fn);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  if (!info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(png))) throw IoError("libpng failed writing " + path.string());

  png_init_io(png, file.get());
  png_set_compression_level(png, 3);
  png_set_IHDR(png, info, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(image.width()) * 3;
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(png, const_cast<png_bytep>(image.data().data() + y * stride));
  }
  png_write_end(png, nullptr);
  if (std::fflush(file.get()) != 0) throw IoError("failed writing " + path.string());
}

ImageBuffer read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_fn);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};
  if (!info) throw IoError("png_create_info_struct failed");
  ImageBuffer image;
  if (setjmp(png_jmpbuf(png))) throw IoError("libpng failed reading " + path.string());

  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    throw IoError(path.string() + " is not an 8-bit RGB PNG");
  }
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  image = ImageBuffer(w, h);
  const auto stride = static_cast<std::size_t>(w) * 3;
  for (int y = 0; y < h; ++y) png_read_row(png, image.data().data() + y * stride, nullptr);
  png_read_end(png, nullptr);
  return image;
}

}  // namespace dialkit
