#include "pfloc/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pfloc/errors.hpp"

namespace pfloc {

void TrackerParams::validate() const {
  if (!(theta_po_sd > 0.0)) throw ConfigError("tracker.theta_po_sd", "must be > 0");
  if (!(theta_po_floor_px >= 0.0)) throw ConfigError("tracker.theta_po_floor_px", "must be >= 0");
  if (n_dismiss < 1) throw ConfigError("tracker.n_dismiss", "must be >= 1");
  if (n_fuse < 1) throw ConfigError("tracker.n_fuse", "must be >= 1");
  if (tau_min_obs < 2) throw ConfigError("tracker.tau_min_obs", "must be >= 2");
  if (min_component_px < 1) throw ConfigError("tracker.min_component_px", "must be >= 1");
  if (!(match_radius_factor > 0.0)) throw ConfigError("tracker.match_radius_factor", "must be > 0");
}

const char* to_string(TrackerMode mode) { return mode == TrackerMode::kSingle ? "single" : "multi"; }

TrackerMode tracker_mode_from_string(const std::string& s) {
  if (s == "single") return TrackerMode::kSingle;
  if (s == "multi") return TrackerMode::kMulti;
  throw ConfigError("tracker.mode", "must be \"single\" or \"multi\"");
}

const char* to_string(TrackPhase phase) {
  switch (phase) {
    case TrackPhase::kCandidate:
      return "candidate";
    case TrackPhase::kActive:
      return "active";
    case TrackPhase::kDismissed:
      return "dismissed";
  }
  return "?";
}

double ood_threshold_px(std::span<const std::int64_t> pixel_index, int frame_width, const TrackerParams& params) {
  double su = 0.0, sv = 0.0, suu = 0.0, svv = 0.0;
  std::size_t n = 0;
  for (const auto idx : pixel_index) {
    if (idx == kOffFrame) continue;
    const double u = double(idx % frame_width), v = double(idx / frame_width);
    su += u;
    sv += v;
    suu += u * u;
    svv += v * v;
    ++n;
  }
  if (n == 0) return params.theta_po_floor_px;
  const double mu = su / n, mv = sv / n;
  const double sd_u = std::sqrt(std::max(0.0, suu / n - mu * mu));
  const double sd_v = std::sqrt(std::max(0.0, svv / n - mv * mv));
  return std::max(params.theta_po_sd * 0.5 * (sd_u + sd_v), params.theta_po_floor_px);
}

PixelAttribution attribute_pixels(const BinaryMask& mask, const std::vector<const TrackState*>& active,
                                  const std::vector<std::vector<std::int64_t>>& projections,
                                  const TrackerParams& params) {
  const int w = mask.width(), h = mask.height();
  PixelAttribution out;
  out.ood = mask;
  const auto box = mask.bounding_box();
  std::vector<SquaredDistanceField> fields;
  for (std::size_t t = 0; t < active.size(); ++t) {
    out.track_ids.push_back(active[t]->id);
    out.restricted.emplace_back(w, h);
    out.theta_px.push_back(ood_threshold_px(projections[t], w, params));
    if (!box) {
      fields.emplace_back();
      continue;
    }
    // Only particles within theta of the mask's bounding box can claim pixels.
    BinaryMask occupancy(w, h);
    for (const auto idx : projections[t]) {
      if (idx != kOffFrame) occupancy.set_at(std::size_t(idx), true);
    }
    const auto margin = static_cast<std::int64_t>(std::ceil(out.theta_px[t]));
    const PixelRegion region = PixelRegion{(*box)[0], (*box)[1], (*box)[2], (*box)[3]}.expanded(margin, w, h);
    fields.emplace_back(occupancy, region);
  }
  if (!box || active.empty()) return out;

  for (int v = (*box)[1]; v <= (*box)[3]; ++v) {
    for (int u = (*box)[0]; u <= (*box)[2]; ++u) {
      if (!mask.get(u, v)) continue;
      int best = -1;
      std::int64_t best_d2 = 0;
      for (std::size_t t = 0; t < active.size(); ++t) {
        const std::int64_t d2 = fields[t].at(u, v);
        const double theta = out.theta_px[t];
        if (static_cast<double>(d2) > theta * theta) continue;
        const bool better = best < 0 || d2 < best_d2 ||
                            (d2 == best_d2 && (theta < out.theta_px[best] ||
                                               (theta == out.theta_px[best] && active[t]->id < active[best]->id)));
        if (better) {
          best = static_cast<int>(t);
          best_d2 = d2;
        }
      }
      if (best >= 0) {
        out.restricted[best].set(u, v);
        out.ood.set(u, v, false);
      }
    }
  }
  return out;
}

BinaryMask ood_pixels(const BinaryMask& mask, const std::vector<TrackState>& tracks, const CameraIntrinsics& K,
                      const CameraPose& pose, const TrackerParams& params) {
  std::vector<const TrackState*> active;
  std::vector<std::vector<std::int64_t>> projections;
  for (const auto& t : tracks) {
    if (t.phase != TrackPhase::kActive) continue;
    active.push_back(&t);
    projections.push_back(project_particles(t.filter, K, pose));
  }
  return attribute_pixels(mask, active, projections, params).ood;
}

bool posteriors_overlap(const PosteriorSummary& a, const PosteriorSummary& b) {
  const double dist = (a.mean - b.mean).norm();
  return dist <= std::sqrt(a.covariance.trace()) && dist <= std::sqrt(b.covariance.trace());
}

Tracker::Tracker(CameraIntrinsics K, FilterParams filter_params, TrackerParams tracker_params, std::uint64_t seed)
    : K_(K), filter_params_(filter_params), params_(tracker_params), seed_(seed) {}

std::vector<const TrackState*> Tracker::active_tracks() const {
  std::vector<const TrackState*> out;
  for (const auto& t : tracks_) {
    if (t.phase == TrackPhase::kActive) out.push_back(&t);
  }
  return out;
}

int Tracker::add_active_track(ParticleSet particles, long long frame) {
  TrackState t;
  t.id = next_id_++;
  t.phase = TrackPhase::kActive;
  t.filter = std::move(particles);
  t.first_seen_frame = frame;
  t.activated_frame = frame;
  tracks_.push_back(std::move(t));
  return tracks_.back().id;
}

void Tracker::dismiss(TrackState& t, long long frame) {
  t.phase = TrackPhase::kDismissed;
  t.dismissed_frame = frame;
  t.filter = ParticleSet{};
  t.overlap_counts.clear();
}

void Tracker::update(const FrameRecord& frame) {
  update_active(frame);
  update_candidates(frame);
  fuse_duplicates(frame);
}

void Tracker::update_active(const FrameRecord& frame) {
  const auto& pose = frame.reported_pose;
  std::vector<TrackState*> active;
  for (auto& t : tracks_) {
    if (t.phase == TrackPhase::kActive) active.push_back(&t);
  }

  std::vector<std::vector<std::int64_t>> projections;
  for (auto* t : active) {
    auto rng = RandomStream::derive(seed_, std::uint64_t(frame.index), StreamPurpose::kPredict, std::uint64_t(t->id));
    predict(t->filter, pose.position, filter_params_, rng);
    projections.push_back(project_particles(t->filter, K_, pose));
  }

  last_attribution_ = attribute_pixels(
      frame.mask, std::vector<const TrackState*>(active.begin(), active.end()), projections, params_);

  for (std::size_t i = 0; i < active.size(); ++i) {
    TrackState& t = *active[i];
    const BinaryMask& restricted = last_attribution_.restricted[i];
    bool updated = false;
    if (!restricted.empty()) {
      weigh_projected(t.filter, projections[i], restricted);
      if (!t.filter.degenerate) {
        auto rng =
            RandomStream::derive(seed_, std::uint64_t(frame.index), StreamPurpose::kResample, std::uint64_t(t.id));
        resample(t.filter, rng);
        updated = true;
      } else {
        t.filter.weights.assign(t.filter.size(), 1.0 / double(t.filter.size()));
        t.filter.degenerate = false;
      }
    }
    if (updated) {
      t.miss_count = 0;
      ++t.total_updates;
    } else if (++t.miss_count >= params_.n_dismiss) {
      dismiss(t, frame.index);
    }
  }
}

void Tracker::update_candidates(const FrameRecord& frame) {
  const auto clusters = cluster_pixels(last_attribution_.ood, params_.min_component_px);
  std::vector<TrackState*> candidates;
  for (auto& t : tracks_) {
    if (t.phase == TrackPhase::kCandidate) candidates.push_back(&t);
  }

  const double radius = params_.match_radius_px();
  std::vector<bool> matched(candidates.size(), false);
  std::vector<TrackState> opened;
  for (const auto& c : clusters) {
    // Lattice centroid to continuous image coordinates (pixel centre).
    const Observation obs{frame.reported_pose, PixelPoint{c.centroid_u + 0.5, c.centroid_v + 0.5}};
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (matched[j]) continue;
      const PixelPoint& last = candidates[j]->candidate_history.back().centroid;
      const double d = std::hypot(last.u - obs.centroid.u, last.v - obs.centroid.v);
      if (d <= radius && d < best_dist) {
        best = static_cast<int>(j);
        best_dist = d;
      }
    }
    if (best >= 0) {
      matched[best] = true;
      candidates[best]->candidate_history.push_back(obs);
    } else {
      TrackState t;
      t.id = next_id_++;
      t.phase = TrackPhase::kCandidate;
      t.first_seen_frame = frame.index;
      t.candidate_history.push_back(obs);
      opened.push_back(std::move(t));
    }
  }

  // Unmatched candidates are dropped outright; they never became tracks.
  std::vector<int> dropped;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (!matched[j]) dropped.push_back(candidates[j]->id);
  }
  std::erase_if(tracks_, [&](const TrackState& t) {
    return t.phase == TrackPhase::kCandidate && std::find(dropped.begin(), dropped.end(), t.id) != dropped.end();
  });
  for (auto& t : opened) tracks_.push_back(std::move(t));

  for (auto& t : tracks_) {
    if (t.phase != TrackPhase::kCandidate ||
        static_cast<int>(t.candidate_history.size()) < params_.tau_min_obs) {
      continue;
    }
    auto rng =
        RandomStream::derive(seed_, std::uint64_t(frame.index), StreamPurpose::kInitialise, std::uint64_t(t.id));
    try {
      t.filter = initialize(t.candidate_history.front(), t.candidate_history.back(), K_, filter_params_, rng);
    } catch (const ParallelRays&) {
      t.phase = TrackPhase::kDismissed;
      continue;
    } catch (const WeakBaseline&) {
      t.phase = TrackPhase::kDismissed;
      continue;
    }
    t.phase = TrackPhase::kActive;
    t.activated_frame = frame.index;
    t.candidate_history.clear();
  }
  // Failed initialisations are discarded rather than kept as dismissed tracks.
  std::erase_if(tracks_, [](const TrackState& t) { return t.phase == TrackPhase::kDismissed && t.activated_frame < 0; });
}

void Tracker::fuse_duplicates(const FrameRecord& frame) {
  std::vector<TrackState*> active;
  std::vector<PosteriorSummary> summaries;
  for (auto& t : tracks_) {
    if (t.phase != TrackPhase::kActive) continue;
    active.push_back(&t);
    summaries.push_back(summarize(t.filter));
  }
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (std::size_t j = i + 1; j < active.size(); ++j) {
      TrackState& a = *active[i];
      TrackState& b = *active[j];
      if (a.phase != TrackPhase::kActive || b.phase != TrackPhase::kActive) continue;
      if (!posteriors_overlap(summaries[i], summaries[j])) {
        a.overlap_counts.erase(b.id);
        b.overlap_counts.erase(a.id);
        continue;
      }
      const int count = ++a.overlap_counts[b.id];
      b.overlap_counts[a.id] = count;
      if (count < params_.n_fuse) continue;
      const bool a_survives =
          a.total_updates > b.total_updates || (a.total_updates == b.total_updates && a.id < b.id);
      TrackState& loser = a_survives ? b : a;
      TrackState& survivor = a_survives ? a : b;
      survivor.overlap_counts.erase(loser.id);
      dismiss(loser, frame.index);
    }
  }
  // Forget counters toward peers that are no longer active.
  for (auto* t : active) {
    if (t->phase != TrackPhase::kActive) continue;
    std::erase_if(t->overlap_counts, [&](const auto& kv) {
      return std::none_of(active.begin(), active.end(),
                          [&](const TrackState* p) { return p->id == kv.first && p->phase == TrackPhase::kActive; });
    });
  }
}

}  // namespace pfloc
