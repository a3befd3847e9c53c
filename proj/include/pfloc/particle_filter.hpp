#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pfloc/geometry.hpp"
#include "pfloc/image.hpp"
#include "pfloc/random.hpp"
#include "pfloc/simworld.hpp"

namespace pfloc {

struct FilterParams {
  std::size_t n_particles = 100000;
  /// Initial per-axis SD (m) at ref_distance_m; scales linearly with range.
  double sd_init = 1000.0;
  int tau_min_obs = 5;
  /// Prediction SD per metre of camera-particle distance.
  double pred_noise_coeff = 0.001;
  double ref_distance_m = 2000.0;

  void validate() const;
};

struct ParticleSet {
  std::vector<WorldPoint> positions;
  std::vector<double> weights;
  /// Set when weighting left every particle at zero weight.
  bool degenerate = false;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
};

struct PosteriorSummary {
  WorldPoint mean = WorldPoint::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

/// A camera pose together with the continuous pixel centroid of a segment.
struct Observation {
  CameraPose pose;
  PixelPoint centroid;
};

inline constexpr double kMinBaselineM = 1.0;
inline constexpr double kCovarianceRegulariser = 1e-6;

/// Gaussian cloud around the midpoint of the two observation rays, with SD
/// sd_init scaled by (distance from b's camera / ref_distance_m). Throws
/// WeakBaseline or ParallelRays.
ParticleSet initialize(const Observation& a, const Observation& b, const CameraIntrinsics& K,
                       const FilterParams& params, RandomStream& rng);

/// Displaces each particle by N(0, s^2 I), s = coeff * |p - camera_centre|.
void predict(ParticleSet& ps, const WorldPoint& camera_centre, const FilterParams& params,
             RandomStream& rng);

inline constexpr std::int64_t kOffFrame = -1;

/// Linear pixel index (v * width + u) of each particle's discretised
/// projection, or kOffFrame when behind the camera or outside the frame.
std::vector<std::int64_t> project_particles(const ParticleSet& ps, const CameraIntrinsics& K,
                                            const CameraPose& pose);

/// weight = exp(-d2) with d2 the squared pixel distance from the particle's
/// projection to the nearest positive pixel; off-frame particles get 0. If the
/// weights sum to zero or underflow they are recomputed as exp(-(d2 - min d2)).
/// Throws EmptyMask.
void weigh(ParticleSet& ps, const BinaryMask& mask, const CameraIntrinsics& K, const CameraPose& pose);
void weigh_projected(ParticleSet& ps, std::span<const std::int64_t> pixel_index, const BinaryMask& mask);

/// Multinomial resampling; output weights are uniform. Throws AllZeroWeights.
void resample(ParticleSet& ps, RandomStream& rng);

/// predict, then weigh and resample when the mask has positive pixels.
void step(ParticleSet& ps, const FrameRecord& frame, const CameraIntrinsics& K, const FilterParams& params,
          RandomStream& rng);

/// Mean pixel position of all positive pixels, in continuous image
/// coordinates (pixel centres). Throws EmptyMask.
PixelPoint mask_centroid(const BinaryMask& mask);
/// Centroid of the largest 8-connected segment, pixel-centre coordinates.
/// Throws EmptyMask.
PixelPoint segment_centroid(const BinaryMask& mask);

/// One filter over the whole mask. Waits for tau_min_obs consecutive
/// non-empty frames, initialises from the largest segment of the first and
/// last of them, then runs step() on every frame. A failed initialisation
/// slides the window forward.
class SingleTargetFilter {
 public:
  SingleTargetFilter(CameraIntrinsics K, FilterParams params, std::uint64_t seed);

  void update(const FrameRecord& frame);

  bool active() const { return active_; }
  const ParticleSet& particles() const { return particles_; }
  long long activated_frame() const { return activated_frame_; }

 private:
  CameraIntrinsics K_;
  FilterParams params_;
  std::uint64_t seed_;
  std::vector<Observation> window_;
  ParticleSet particles_;
  bool active_ = false;
  long long activated_frame_ = -1;
};

WorldPoint particle_mean(const ParticleSet& ps);
/// Population covariance (divides by N), unregularised.
Eigen::Matrix3d particle_covariance(const ParticleSet& ps, const WorldPoint& mean);
/// Unweighted mean and covariance + 1e-6 I.
PosteriorSummary summarize(const ParticleSet& ps);

}  // namespace pfloc
