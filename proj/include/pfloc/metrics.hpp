#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pfloc/particle_filter.hpp"
#include "pfloc/tracker.hpp"

namespace pfloc {

struct TargetTruth {
  int target_id = 0;
  WorldPoint centre = WorldPoint::Zero();
};

/// sqrt(sum |p_i - m_t|^2 / N), the RMS particle error.
double rmse_particle(const ParticleSet& ps, const WorldPoint& target);
/// |mean(ps) - m_t|.
double rmse_mean_dist(const ParticleSet& ps, const WorldPoint& target);
/// -log N(m_t; mean, cov + 1e-6 I) in nats.
double nlpd(const ParticleSet& ps, const WorldPoint& target);
double nlpd(const PosteriorSummary& summary, const WorldPoint& target);

/// Nearest truth (by |mean - m_t|) for each Active track; ties go to the
/// lower target id. Several tracks may share one target.
std::map<int, int> assign_tracks(const std::vector<const TrackState*>& tracks, const std::vector<TargetTruth>& truths);
std::map<int, int> assign_means(const std::vector<std::pair<int, WorldPoint>>& means,
                                const std::vector<TargetTruth>& truths);

struct TrackMetric {
  int track_id = 0;
  int target_id = 0;
  double rmse_mean_dist_m = 0.0;
  double rmse_particle_m = 0.0;
  double nlpd = 0.0;
  PosteriorSummary summary;
};

struct StepMetric {
  long long frame = 0;
  double translation_m = 0.0;
  std::vector<TrackMetric> tracks;

  // Means over tracks; absent without tracks.
  std::optional<double> mean_rmse_mean_dist() const;
  std::optional<double> mean_rmse_particle() const;
  std::optional<double> mean_nlpd() const;
};

StepMetric evaluate_step(long long frame, double translation_m, const std::vector<const TrackState*>& tracks,
                         const std::vector<TargetTruth>& truths);

struct RunAggregate {
  std::optional<double> rmse_min;
  std::optional<double> rmse_window_mean;
  std::optional<double> nlpd_min;
  std::optional<double> rmse_particle_min;
};

inline constexpr std::pair<double, double> kDefaultWindow{200.0, 1000.0};

/// Minima over steps with at least one track; RMSE mean over steps whose
/// translation lies inside the window (inclusive).
RunAggregate aggregate(const std::vector<StepMetric>& run, std::pair<double, double> window = kDefaultWindow);

/// Arithmetic mean of each field across runs; a field is absent if it is
/// absent in every run.
RunAggregate average_runs(const std::vector<RunAggregate>& runs);

}  // namespace pfloc
