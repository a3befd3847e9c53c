#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "pfloc/image.hpp"

namespace pfloc {

/// Inclusive pixel rectangle.
struct PixelRegion {
  int u0 = 0;
  int v0 = 0;
  int u1 = -1;
  int v1 = -1;

  int width() const { return u1 - u0 + 1; }
  int height() const { return v1 - v0 + 1; }
  bool empty() const { return u1 < u0 || v1 < v0; }
  bool contains(std::int64_t u, std::int64_t v) const { return u >= u0 && u <= u1 && v >= v0 && v <= v1; }

  static PixelRegion full(int width, int height) { return {0, 0, width - 1, height - 1}; }
  /// Grows by `margin` pixels on each side, clipped to a width x height frame.
  PixelRegion expanded(std::int64_t margin, int width, int height) const;
};

/// Exact squared Euclidean distance (in pixel units) from each pixel of a
/// region to the nearest feature pixel inside that region. Pixels outside the
/// region, and pixels with no feature in the region, read as kFar.
class SquaredDistanceField {
 public:
  static constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

  SquaredDistanceField() = default;
  SquaredDistanceField(const BinaryMask& features, PixelRegion region);
  explicit SquaredDistanceField(const BinaryMask& features)
      : SquaredDistanceField(features, PixelRegion::full(features.width(), features.height())) {}

  std::int64_t at(std::int64_t u, std::int64_t v) const {
    if (!region_.contains(u, v)) return kFar;
    return d2_[std::size_t(v - region_.v0) * region_.width() + std::size_t(u - region_.u0)];
  }
  const PixelRegion& region() const { return region_; }

 private:
  PixelRegion region_;
  std::vector<std::int64_t> d2_;
};

/// 8-connected component summary.
struct PixelCluster {
  double centroid_u = 0.0;
  double centroid_v = 0.0;
  std::size_t size = 0;
};

/// 8-connected components with at least min_px pixels, largest first. Equal
/// sizes keep raster order of their first pixel.
std::vector<PixelCluster> cluster_pixels(const BinaryMask& mask, std::size_t min_px);

}  // namespace pfloc
