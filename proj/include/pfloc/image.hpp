#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pfloc/geometry.hpp"

namespace pfloc {

/// Row-major boolean pixel grid.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : width_(width), height_(height), bits_(std::size_t(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool get(int u, int v) const { return bits_[index(u, v)] != 0; }
  void set(int u, int v, bool on = true) { bits_[index(u, v)] = on ? 1 : 0; }
  bool at(std::size_t i) const { return bits_[i] != 0; }
  void set_at(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  bool contains(std::int64_t u, std::int64_t v) const {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }
  std::size_t index(int u, int v) const { return std::size_t(v) * width_ + u; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  void clear();
  /// Inclusive bounding box (u0, v0, u1, v1) of set pixels.
  std::optional<std::array<int, 4>> bounding_box() const;

  BinaryMask complement() const;
  BinaryMask& operator|=(const BinaryMask& other);
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Row-major 8-bit grayscale image.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), samples(std::size_t(w) * h, fill) {}
  std::uint8_t& at(int u, int v) { return samples[std::size_t(v) * width + u]; }
  std::uint8_t at(int u, int v) const { return samples[std::size_t(v) * width + u]; }
  friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

// PGM P5, maxval 255.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
/// Masks are written as 0 (background) / 255 (positive).
void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask);
/// Any nonzero sample reads as positive.
BinaryMask read_mask_pgm(const std::filesystem::path& path);

GrayImage mask_to_image(const BinaryMask& mask);

}  // namespace pfloc
