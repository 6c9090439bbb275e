#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dialkit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// 8-bit RGB, row-major, 3 bytes per pixel.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  Rgb at(int x, int y) const {
    const auto* p = &data_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    auto* p = &data_[3 * (static_cast<std::size_t>(y) * width_ + x)];
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// 8-bit RGB PNG, fixed zlib level, no ancillary chunks. Throws IoError.
void write_png(const std::filesystem::path& path, const ImageBuffer& image);
ImageBuffer read_png(const std::filesystem::path& path);

}  // namespace dialkit
