#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfloc/distance_transform.hpp"
#include "pfloc/particle_filter.hpp"

namespace pfloc {

/// kSingle runs one filter over the whole mask; kMulti spawns a track per
/// detected object.
enum class TrackerMode { kSingle, kMulti };

const char* to_string(TrackerMode mode);
TrackerMode tracker_mode_from_string(const std::string& s);

struct TrackerParams {
  TrackerMode mode = TrackerMode::kMulti;
  /// OOD threshold in units of the projected cloud's pixel SD.
  double theta_po_sd = 1.0;
  double theta_po_floor_px = 20.0;
  int n_dismiss = 5;
  int n_fuse = 5;
  int tau_min_obs = 5;
  std::size_t min_component_px = 1;
  /// Candidate matching radius as a multiple of theta_po_floor_px.
  double match_radius_factor = 4.0;

  void validate() const;
  double match_radius_px() const { return match_radius_factor * theta_po_floor_px; }
};

enum class TrackPhase { kCandidate, kActive, kDismissed };

const char* to_string(TrackPhase phase);

struct TrackState {
  int id = 0;
  TrackPhase phase = TrackPhase::kCandidate;
  ParticleSet filter;                          // Active only
  std::vector<Observation> candidate_history;  // Candidate only
  int miss_count = 0;
  long long total_updates = 0;
  std::map<int, int> overlap_counts;  // peer id -> consecutive overlapping frames
  long long first_seen_frame = -1;
  long long activated_frame = -1;
  long long dismissed_frame = -1;
};

/// Per-frame split of positive pixels between Active tracks and the
/// out-of-distribution remainder. Every positive pixel lands in exactly one
/// of these masks.
struct PixelAttribution {
  std::vector<int> track_ids;
  std::vector<BinaryMask> restricted;
  std::vector<double> theta_px;
  BinaryMask ood;
};

/// OOD threshold for one cloud: max(theta_po_sd * s, floor), s the mean of
/// the u and v SDs of its in-frame discretised projections.
double ood_threshold_px(std::span<const std::int64_t> pixel_index, int frame_width, const TrackerParams& params);

/// Assigns each positive pixel to the Active track with the nearest projected
/// particle among those within their own threshold (ties: smaller threshold,
/// then lower id). Unclaimed pixels are OOD.
PixelAttribution attribute_pixels(const BinaryMask& mask, const std::vector<const TrackState*>& active,
                                  const std::vector<std::vector<std::int64_t>>& projections,
                                  const TrackerParams& params);

BinaryMask ood_pixels(const BinaryMask& mask, const std::vector<TrackState>& tracks, const CameraIntrinsics& K,
                      const CameraPose& pose, const TrackerParams& params);

/// Multi-filter manager: spawns filters from persistent OOD clusters,
/// dismisses starved filters and fuses duplicates.
///
/// Random draws are keyed by (seed, frame index, track id), so a track's
/// trajectory does not depend on how many other tracks exist.
class Tracker {
 public:
  Tracker(CameraIntrinsics K, FilterParams filter_params, TrackerParams tracker_params, std::uint64_t seed);

  void update(const FrameRecord& frame);

  const std::vector<TrackState>& tracks() const { return tracks_; }
  std::vector<const TrackState*> active_tracks() const;
  const PixelAttribution& last_attribution() const { return last_attribution_; }

  // Test hook: inserts an Active track with the given particles.
  int add_active_track(ParticleSet particles, long long frame = -1);

 private:
  void update_active(const FrameRecord& frame);
  void update_candidates(const FrameRecord& frame);
  void fuse_duplicates(const FrameRecord& frame);
  void dismiss(TrackState& t, long long frame);

  CameraIntrinsics K_;
  FilterParams filter_params_;
  TrackerParams params_;
  std::uint64_t seed_;
  int next_id_ = 0;
  std::vector<TrackState> tracks_;
  PixelAttribution last_attribution_;
};

/// Overlap test used for fusion: each mean lies within the other's
/// trace-based SD, sqrt(trace(cov)).
bool posteriors_overlap(const PosteriorSummary& a, const PosteriorSummary& b);

}  // namespace pfloc
