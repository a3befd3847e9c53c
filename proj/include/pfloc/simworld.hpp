#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pfloc/geometry.hpp"
#include "pfloc/image.hpp"
#include "pfloc/random.hpp"

namespace pfloc {

struct CuboidTarget {
  WorldPoint centre = WorldPoint::Zero();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Constant(50.0);
  /// Metres of camera translation before the target becomes visible.
  double appear_after_m = 0.0;

  std::array<WorldPoint, 8> corners() const;
};

/// Straight camera path sampled every step_m metres, fixed attitude.
struct Trajectory {
  WorldPoint start = WorldPoint::Zero();
  WorldPoint end = WorldPoint(1000.0, 0.0, 0.0);
  double step_m = 10.0;
  Eigen::Matrix3d camera_rotation = Eigen::Matrix3d::Identity();

  double length() const { return (end - start).norm(); }
  /// Frames from start to end, start included.
  std::size_t frame_count() const;
  WorldPoint position(std::size_t k) const;
  double translation(std::size_t k) const { return double(k) * step_m; }
};

struct SegmentationNoiseConfig {
  double rho_fp = 0.0;
  double delta_rho_fp = 0.0;
  int max_fp = 0;
  double rho_fn = 0.0;
  double rho_pfn = 0.0;
  double delta_rho_pfn = 0.0;
  std::array<int, 2> fp_size_px{5, 50};
};

/// A persistent false-positive rectangle, in pixels.
struct FpRect {
  int u0 = 0;
  int v0 = 0;
  int width = 0;
  int height = 0;
};

/// A persistent partial false negative: a corner-anchored fraction of the
/// current target bounding box.
struct PartialFn {
  double fraction_u = 0.5;
  double fraction_v = 0.5;
  int corner = 0;  // 0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right
};

/// Noise processes that persist across frames.
struct SegmentationNoiseState {
  std::vector<FpRect> false_positives;
  std::optional<PartialFn> partial_fn;
};

struct FrameRecord {
  long long index = 0;
  double translation_m = 0.0;
  CameraPose reported_pose;
  CameraPose true_pose;
  BinaryMask mask;
};

/// Monotone-chain hull of integer points, counter-clockwise, collinear points
/// removed. One or two vertices for degenerate inputs.
std::vector<PixelIndex> convex_hull(std::vector<PixelIndex> points);
/// Sets every pixel whose lattice point lies inside or on the hull. Exact
/// integer arithmetic; clipped to the mask frame.
void fill_convex_hull(const std::vector<PixelIndex>& hull, BinaryMask& mask);

BinaryMask render_truth_mask(const std::vector<CuboidTarget>& targets, const CameraIntrinsics& K,
                             const CameraPose& true_pose, double translation_m);

/// Applies full/partial false negatives and persistent false positives.
/// A full false negative returns an empty mask and leaves the registry as it
/// was.
BinaryMask corrupt_mask(const BinaryMask& truth, SegmentationNoiseState& state,
                        const SegmentationNoiseConfig& cfg, RandomStream& rng);

struct SimulationConfig {
  CameraIntrinsics camera;
  Trajectory trajectory;
  std::vector<CuboidTarget> targets;
  PoseNoiseConfig pose_noise;
  SegmentationNoiseConfig segmentation_noise;
};

/// Sequential frame generator. Each frame draws from streams keyed by
/// (seed, frame index), so the output is fully determined by (config, seed).
class ScenarioStream {
 public:
  ScenarioStream(SimulationConfig cfg, std::uint64_t seed);

  bool done() const { return next_ >= cfg_.trajectory.frame_count(); }
  FrameRecord next();
  const SimulationConfig& config() const { return cfg_; }

 private:
  SimulationConfig cfg_;
  std::uint64_t seed_;
  std::size_t next_ = 0;
  SegmentationNoiseState noise_;
};

}  // namespace pfloc
