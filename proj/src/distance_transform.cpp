#include "pfloc/distance_transform.hpp"

#include <algorithm>

namespace pfloc {

PixelRegion PixelRegion::expanded(std::int64_t margin, int width, int height) const {
  if (empty()) return *this;
  auto clip = [](std::int64_t x, std::int64_t hi) { return static_cast<int>(std::clamp<std::int64_t>(x, 0, hi)); };
  return {clip(u0 - margin, width - 1), clip(v0 - margin, height - 1), clip(u1 + margin, width - 1),
          clip(v1 + margin, height - 1)};
}

namespace {

constexpr std::int64_t kFar = SquaredDistanceField::kFar;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher). Entries equal to
// kFar carry no parabola. All arithmetic on the parabolas is exact: inputs
// are integers well below 2^53 and break points are only compared with
// integers.
void envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                 std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kFar) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = static_cast<double>((f[q] + std::int64_t(q) * q) - (f[p] + std::int64_t(p) * p)) /
          static_cast<double>(2 * (q - p));
      if (s <= z[k]) {
        --k;
        if (k < 0) break;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = k == 0 ? -std::numeric_limits<double>::infinity() : s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    std::fill(out.begin(), out.end(), kFar);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const std::int64_t d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

SquaredDistanceField::SquaredDistanceField(const BinaryMask& features, PixelRegion region)
    : region_(region) {
  if (region_.empty()) return;
  const int w = region_.width();
  const int h = region_.height();
  d2_.assign(std::size_t(w) * h, kFar);

  // Column pass: squared vertical distance to the nearest feature.
  for (int x = 0; x < w; ++x) {
    const int u = region_.u0 + x;
    std::int64_t last = -1;
    for (int y = 0; y < h; ++y) {
      if (features.get(u, region_.v0 + y)) last = y;
      if (last >= 0) d2_[std::size_t(y) * w + x] = (y - last) * (y - last);
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (features.get(u, region_.v0 + y)) last = y;
      if (last >= 0) {
        auto& cell = d2_[std::size_t(y) * w + x];
        cell = std::min(cell, (last - y) * (last - y));
      }
    }
  }

  // Row pass.
  std::vector<std::int64_t> f(w), out(w);
  std::vector<int> v(w);
  std::vector<double> z(std::size_t(w) + 1);
  for (int y = 0; y < h; ++y) {
    auto* row = d2_.data() + std::size_t(y) * w;
    std::copy(row, row + w, f.begin());
    envelope_1d(f, out, v, z);
    std::copy(out.begin(), out.end(), row);
  }
}

std::vector<PixelCluster> cluster_pixels(const BinaryMask& mask, std::size_t min_px) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<PixelCluster> clusters;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.at(start) || seen[start]) continue;
    seen[start] = 1;
    stack.assign(1, start);
    double su = 0.0, sv = 0.0;
    std::size_t n = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int u = static_cast<int>(i % w);
      const int v = static_cast<int>(i / w);
      su += u;
      sv += v;
      ++n;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int nu = u + du, nv = v + dv;
          if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
          const std::size_t j = std::size_t(nv) * w + nu;
          if (mask.at(j) && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
    }
    if (n >= min_px) clusters.push_back({su / double(n), sv / double(n), n});
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const PixelCluster& a, const PixelCluster& b) { return a.size > b.size; });
  return clusters;
}

}  // namespace pfloc
