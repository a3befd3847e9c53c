#include "pfloc/simworld.hpp"

#include <algorithm>
#include <cmath>

namespace pfloc {

std::array<WorldPoint, 8> CuboidTarget::corners() const {
  std::array<WorldPoint, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
    out[i] = centre + sign.cwiseProduct(half_extents);
  }
  return out;
}

std::size_t Trajectory::frame_count() const {
  return static_cast<std::size_t>(std::floor(length() / step_m + 1e-9)) + 1;
}

WorldPoint Trajectory::position(std::size_t k) const {
  const Eigen::Vector3d dir = (end - start) / length();
  return start + dir * translation(k);
}

namespace {

using i128 = __int128;

i128 cross(const PixelIndex& o, const PixelIndex& a, const PixelIndex& b) {
  return i128(a.u - o.u) * (b.v - o.v) - i128(a.v - o.v) * (b.u - o.u);
}

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

}  // namespace

std::vector<PixelIndex> convex_hull(std::vector<PixelIndex> pts) {
  std::sort(pts.begin(), pts.end(), [](const PixelIndex& a, const PixelIndex& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;
  std::vector<PixelIndex> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

void fill_convex_hull(const std::vector<PixelIndex>& hull, BinaryMask& mask) {
  if (hull.empty()) return;
  std::int64_t umin = hull[0].u, umax = hull[0].u, vmin = hull[0].v, vmax = hull[0].v;
  for (const auto& p : hull) {
    umin = std::min(umin, p.u);
    umax = std::max(umax, p.u);
    vmin = std::min(vmin, p.v);
    vmax = std::max(vmax, p.v);
  }
  const std::int64_t v_lo = std::max<std::int64_t>(vmin, 0);
  const std::int64_t v_hi = std::min<std::int64_t>(vmax, mask.height() - 1);
  const std::size_t n = hull.size();
  for (std::int64_t v = v_lo; v <= v_hi; ++v) {
    i128 lo = std::max<std::int64_t>(umin, 0);
    i128 hi = std::min<std::int64_t>(umax, mask.width() - 1);
    // Each CCW edge a->b admits p iff cross(b - a, p - a) >= 0.
    for (std::size_t i = 0; n >= 2 && i < n && lo <= hi; ++i) {
      const PixelIndex& a = hull[i];
      const PixelIndex& b = hull[(i + 1) % n];
      const i128 du = b.u - a.u;
      const i128 dv = b.v - a.v;
      const i128 rhs = du * (v - a.v);
      if (dv == 0) {
        if (rhs < 0) hi = lo - 1;
      } else if (dv > 0) {
        hi = std::min(hi, a.u + floor_div(rhs, dv));
      } else {
        lo = std::max(lo, a.u + ceil_div(rhs, dv));
      }
    }
    for (i128 u = lo; u <= hi; ++u) mask.set(static_cast<int>(u), static_cast<int>(v));
  }
}

BinaryMask render_truth_mask(const std::vector<CuboidTarget>& targets, const CameraIntrinsics& K,
                             const CameraPose& true_pose, double translation_m) {
  BinaryMask mask(K.width, K.height);
  std::vector<PixelIndex> pts;
  for (const auto& target : targets) {
    if (target.appear_after_m > translation_m) continue;
    pts.clear();
    for (const auto& corner : target.corners()) {
      if (auto px = project_point(corner, K, true_pose)) pts.push_back(discretise(*px));
    }
    if (pts.empty()) continue;
    fill_convex_hull(convex_hull(pts), mask);
  }
  return mask;
}

BinaryMask corrupt_mask(const BinaryMask& truth, SegmentationNoiseState& state,
                        const SegmentationNoiseConfig& cfg, RandomStream& rng) {
  const int w = truth.width(), h = truth.height();
  if (rng.bernoulli(cfg.rho_fn)) return BinaryMask(w, h);

  // Persistent false positives: dismiss existing ones, then maybe spawn.
  auto& fps = state.false_positives;
  std::erase_if(fps, [&](const FpRect&) { return rng.bernoulli(cfg.delta_rho_fp); });
  if (static_cast<int>(fps.size()) < cfg.max_fp && rng.bernoulli(cfg.rho_fp)) {
    FpRect r;
    r.width = std::min<int>(static_cast<int>(rng.uniform_int(cfg.fp_size_px[0], cfg.fp_size_px[1])), w);
    r.height = std::min<int>(static_cast<int>(rng.uniform_int(cfg.fp_size_px[0], cfg.fp_size_px[1])), h);
    r.u0 = static_cast<int>(rng.uniform_int(0, w - r.width));
    r.v0 = static_cast<int>(rng.uniform_int(0, h - r.height));
    fps.push_back(r);
  }

  if (state.partial_fn) {
    if (rng.bernoulli(cfg.delta_rho_pfn)) state.partial_fn.reset();
  } else if (rng.bernoulli(cfg.rho_pfn)) {
    PartialFn p;
    p.fraction_u = rng.uniform(0.3, 0.7);
    p.fraction_v = rng.uniform(0.3, 0.7);
    p.corner = static_cast<int>(rng.uniform_int(0, 3));
    state.partial_fn = p;
  }

  BinaryMask out = truth;
  if (state.partial_fn) {
    if (const auto box = truth.bounding_box()) {
      const auto [u0, v0, u1, v1] = *box;
      const int bw = u1 - u0 + 1, bh = v1 - v0 + 1;
      const int cw = static_cast<int>(std::ceil(state.partial_fn->fraction_u * bw));
      const int ch = static_cast<int>(std::ceil(state.partial_fn->fraction_v * bh));
      const bool right = state.partial_fn->corner % 2 == 1;
      const bool bottom = state.partial_fn->corner >= 2;
      const int cu0 = right ? u1 - cw + 1 : u0;
      const int cv0 = bottom ? v1 - ch + 1 : v0;
      for (int v = cv0; v < cv0 + ch; ++v) {
        for (int u = cu0; u < cu0 + cw; ++u) out.set(u, v, false);
      }
    }
  }
  for (const auto& r : fps) {
    for (int v = r.v0; v < r.v0 + r.height; ++v) {
      for (int u = r.u0; u < r.u0 + r.width; ++u) out.set(u, v, true);
    }
  }
  return out;
}

ScenarioStream::ScenarioStream(SimulationConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) {}

FrameRecord ScenarioStream::next() {
  const std::size_t k = next_++;
  FrameRecord rec;
  rec.index = static_cast<long long>(k);
  rec.translation_m = cfg_.trajectory.translation(k);
  rec.true_pose.rotation = cfg_.trajectory.camera_rotation;
  rec.true_pose.position = cfg_.trajectory.position(k);
  auto pose_rng = RandomStream::derive(seed_, k, StreamPurpose::kPoseNoise);
  rec.reported_pose = perturb_pose(rec.true_pose, cfg_.pose_noise, pose_rng);
  auto seg_rng = RandomStream::derive(seed_, k, StreamPurpose::kSegmentationNoise);
  const BinaryMask truth = render_truth_mask(cfg_.targets, cfg_.camera, rec.true_pose, rec.translation_m);
  rec.mask = corrupt_mask(truth, noise_, cfg_.segmentation_noise, seg_rng);
  return rec;
}

}  // namespace pfloc
