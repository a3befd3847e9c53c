#include "pfloc/particle_filter.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include "pfloc/distance_transform.hpp"
#include "pfloc/errors.hpp"

namespace pfloc {

namespace {
// exp(-d2) underflows to zero past d2 = 745.
constexpr std::int64_t kWeightReachPx = 28;
}  // namespace

void FilterParams::validate() const {
  if (n_particles < 1) throw ConfigError("filter.n_particles", "must be >= 1");
  if (!(sd_init > 0.0)) throw ConfigError("filter.sd_init", "must be > 0");
  if (tau_min_obs < 2) throw ConfigError("filter.tau_min_obs", "must be >= 2");
  if (!(pred_noise_coeff >= 0.0)) throw ConfigError("filter.pred_noise_coeff", "must be >= 0");
  if (!(ref_distance_m > 0.0)) throw ConfigError("filter.ref_distance_m", "must be > 0");
}

ParticleSet initialize(const Observation& a, const Observation& b, const CameraIntrinsics& K,
                       const FilterParams& params, RandomStream& rng) {
  const double baseline = (a.pose.position - b.pose.position).norm();
  if (baseline < kMinBaselineM) throw WeakBaseline(baseline);
  const WorldPoint m_init =
      ray_midpoint(back_project_ray(a.centroid, K, a.pose), back_project_ray(b.centroid, K, b.pose));
  const double sd = params.sd_init * ((m_init - b.pose.position).norm() / params.ref_distance_m);

  ParticleSet ps;
  ps.positions.resize(params.n_particles);
  for (auto& p : ps.positions) {
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    p = m_init + sd * Eigen::Vector3d(x, y, z);
  }
  ps.weights.assign(params.n_particles, 1.0 / double(params.n_particles));
  return ps;
}

void predict(ParticleSet& ps, const WorldPoint& camera_centre, const FilterParams& params,
             RandomStream& rng) {
  if (params.pred_noise_coeff == 0.0) return;
  for (auto& p : ps.positions) {
    const double sd = params.pred_noise_coeff * (p - camera_centre).norm();
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    p += sd * Eigen::Vector3d(x, y, z);
  }
}

std::vector<std::int64_t> project_particles(const ParticleSet& ps, const CameraIntrinsics& K,
                                            const CameraPose& pose) {
  std::vector<std::int64_t> out(ps.size(), kOffFrame);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto px = project_point(ps.positions[i], K, pose);
    if (!px) continue;
    const PixelIndex idx = discretise(*px);
    if (K.contains(idx)) out[i] = idx.v * K.width + idx.u;
  }
  return out;
}

void weigh_projected(ParticleSet& ps, std::span<const std::int64_t> pixel_index, const BinaryMask& mask) {
  const auto box = mask.bounding_box();
  if (!box) throw EmptyMask();
  const int w = mask.width(), h = mask.height();
  const PixelRegion near = PixelRegion{(*box)[0], (*box)[1], (*box)[2], (*box)[3]}.expanded(kWeightReachPx, w, h);
  const SquaredDistanceField field(mask, near);

  ps.weights.assign(ps.size(), 0.0);
  ps.degenerate = false;
  double total = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::int64_t idx = pixel_index[i];
    if (idx == kOffFrame) continue;
    const std::int64_t d2 = field.at(idx % w, idx / w);
    if (d2 >= SquaredDistanceField::kFar) continue;
    ps.weights[i] = std::exp(-static_cast<double>(d2));
    total += ps.weights[i];
  }
  if (total >= DBL_MIN) return;

  // All weights underflowed: shift by the smallest squared distance.
  const SquaredDistanceField full(mask);
  std::int64_t min_d2 = SquaredDistanceField::kFar;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (pixel_index[i] != kOffFrame) min_d2 = std::min(min_d2, full.at(pixel_index[i] % w, pixel_index[i] / w));
  }
  if (min_d2 >= SquaredDistanceField::kFar) {
    ps.degenerate = true;
    return;
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const std::int64_t idx = pixel_index[i];
    ps.weights[i] = idx == kOffFrame ? 0.0 : std::exp(-static_cast<double>(full.at(idx % w, idx / w) - min_d2));
  }
}

void weigh(ParticleSet& ps, const BinaryMask& mask, const CameraIntrinsics& K, const CameraPose& pose) {
  if (mask.empty()) throw EmptyMask();
  const auto idx = project_particles(ps, K, pose);
  weigh_projected(ps, idx, mask);
}

void resample(ParticleSet& ps, RandomStream& rng) {
  const std::size_t n = ps.size();
  std::vector<double> cumulative(n);
  std::partial_sum(ps.weights.begin(), ps.weights.end(), cumulative.begin());
  const double total = n ? cumulative.back() : 0.0;
  if (!(total > 0.0)) throw AllZeroWeights();

  std::size_t last_positive = n - 1;
  while (ps.weights[last_positive] <= 0.0) --last_positive;

  std::vector<WorldPoint> drawn(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform(0.0, total);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t j = it == cumulative.end() ? last_positive : std::size_t(it - cumulative.begin());
    drawn[i] = ps.positions[j];
  }
  ps.positions = std::move(drawn);
  ps.weights.assign(n, 1.0 / double(n));
  ps.degenerate = false;
}

void step(ParticleSet& ps, const FrameRecord& frame, const CameraIntrinsics& K, const FilterParams& params,
          RandomStream& rng) {
  predict(ps, frame.reported_pose.position, params, rng);
  if (frame.mask.empty()) return;
  weigh(ps, frame.mask, K, frame.reported_pose);
  if (ps.degenerate) {
    // Nothing projected into the frame; keep the predicted cloud.
    ps.weights.assign(ps.size(), 1.0 / double(ps.size()));
    ps.degenerate = false;
    return;
  }
  resample(ps, rng);
}

PixelPoint mask_centroid(const BinaryMask& mask) {
  double su = 0.0, sv = 0.0;
  std::size_t n = 0;
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (!mask.get(u, v)) continue;
      su += u;
      sv += v;
      ++n;
    }
  }
  if (n == 0) throw EmptyMask();
  return {su / double(n) + 0.5, sv / double(n) + 0.5};
}

PixelPoint segment_centroid(const BinaryMask& mask) {
  const auto clusters = cluster_pixels(mask, 1);
  if (clusters.empty()) throw EmptyMask();
  return {clusters.front().centroid_u + 0.5, clusters.front().centroid_v + 0.5};
}

SingleTargetFilter::SingleTargetFilter(CameraIntrinsics K, FilterParams params, std::uint64_t seed)
    : K_(K), params_(params), seed_(seed) {}

void SingleTargetFilter::update(const FrameRecord& frame) {
  const auto frame_id = static_cast<std::uint64_t>(frame.index);
  if (active_) {
    auto rng = RandomStream::derive(seed_, frame_id, StreamPurpose::kPredict);
    step(particles_, frame, K_, params_, rng);
    return;
  }
  if (frame.mask.empty()) {
    window_.clear();
    return;
  }
  window_.push_back({frame.reported_pose, segment_centroid(frame.mask)});
  if (static_cast<int>(window_.size()) < params_.tau_min_obs) return;
  auto rng = RandomStream::derive(seed_, frame_id, StreamPurpose::kInitialise);
  try {
    particles_ = initialize(window_.front(), window_.back(), K_, params_, rng);
  } catch (const ParallelRays&) {
    window_.erase(window_.begin());
    return;
  } catch (const WeakBaseline&) {
    window_.erase(window_.begin());
    return;
  }
  active_ = true;
  activated_frame_ = frame.index;
  window_.clear();
}

WorldPoint particle_mean(const ParticleSet& ps) {
  WorldPoint sum = WorldPoint::Zero();
  for (const auto& p : ps.positions) sum += p;
  return sum / double(ps.size());
}

Eigen::Matrix3d particle_covariance(const ParticleSet& ps, const WorldPoint& mean) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : ps.positions) {
    const Eigen::Vector3d d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  return cov / double(ps.size());
}

PosteriorSummary summarize(const ParticleSet& ps) {
  PosteriorSummary s;
  s.mean = particle_mean(ps);
  s.covariance = particle_covariance(ps, s.mean);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  s.covariance += kCovarianceRegulariser * Eigen::Matrix3d::Identity();
  return s;
}

}  // namespace pfloc
