#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vidmem {

// RGB frame buffer, 8 bits per channel, row-major. Channel values represent
// [0,1] as v/255 so frames round-trip PPM files bit-exactly.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height)
      : width_(width),
        height_(height),
        data_(static_cast<std::size_t>(width) * height * 3, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }

  double value(int x, int y, int c) const { return at(x, y, c) / 255.0; }

  void set_value(int x, int y, int c, double v) {
    at(x, y, c) = quantize(v);
  }

  static std::uint8_t quantize(double v) {
    const double clamped = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<std::uint8_t>(clamped * 255.0 + 0.5);
  }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  bool operator==(const Frame& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Binary PPM (P6, maxval 255).
void write_ppm(const Frame& frame, const std::filesystem::path& path);
Frame read_ppm(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

}  // namespace vidmem
