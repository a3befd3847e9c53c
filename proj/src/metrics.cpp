#include "pfloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pfloc {

double rmse_particle(const ParticleSet& ps, const WorldPoint& target) {
  double sum = 0.0;
  for (const auto& p : ps.positions) sum += (p - target).squaredNorm();
  return std::sqrt(sum / double(ps.size()));
}

double rmse_mean_dist(const ParticleSet& ps, const WorldPoint& target) {
  return (particle_mean(ps) - target).norm();
}

double nlpd(const PosteriorSummary& summary, const WorldPoint& target) {
  const Eigen::LLT<Eigen::Matrix3d> llt(summary.covariance);
  const Eigen::Vector3d diff = target - summary.mean;
  const Eigen::Vector3d white = llt.matrixL().solve(diff);
  const Eigen::Matrix3d L = llt.matrixL();
  const double log_det = 2.0 * (std::log(L(0, 0)) + std::log(L(1, 1)) + std::log(L(2, 2)));
  return 0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + log_det + white.squaredNorm());
}

double nlpd(const ParticleSet& ps, const WorldPoint& target) { return nlpd(summarize(ps), target); }

std::map<int, int> assign_means(const std::vector<std::pair<int, WorldPoint>>& means,
                                const std::vector<TargetTruth>& truths) {
  std::map<int, int> out;
  if (truths.empty()) return out;
  for (const auto& [track_id, mean] : means) {
    const TargetTruth* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& t : truths) {
      const double d = (mean - t.centre).norm();
      if (d < best_d || (d == best_d && best && t.target_id < best->target_id)) {
        best = &t;
        best_d = d;
      }
    }
    out[track_id] = best->target_id;
  }
  return out;
}

std::map<int, int> assign_tracks(const std::vector<const TrackState*>& tracks, const std::vector<TargetTruth>& truths) {
  std::vector<std::pair<int, WorldPoint>> means;
  for (const auto* t : tracks) {
    if (t->phase == TrackPhase::kActive && !t->filter.empty()) means.emplace_back(t->id, particle_mean(t->filter));
  }
  return assign_means(means, truths);
}

namespace {

template <typename F>
std::optional<double> mean_of(const std::vector<TrackMetric>& tracks, F field) {
  if (tracks.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& t : tracks) sum += field(t);
  return sum / double(tracks.size());
}

}  // namespace

std::optional<double> StepMetric::mean_rmse_mean_dist() const {
  return mean_of(tracks, [](const TrackMetric& t) { return t.rmse_mean_dist_m; });
}
std::optional<double> StepMetric::mean_rmse_particle() const {
  return mean_of(tracks, [](const TrackMetric& t) { return t.rmse_particle_m; });
}
std::optional<double> StepMetric::mean_nlpd() const {
  return mean_of(tracks, [](const TrackMetric& t) { return t.nlpd; });
}

StepMetric evaluate_step(long long frame, double translation_m, const std::vector<const TrackState*>& tracks,
                         const std::vector<TargetTruth>& truths) {
  StepMetric step;
  step.frame = frame;
  step.translation_m = translation_m;
  if (truths.empty()) return step;
  std::vector<std::pair<int, WorldPoint>> means;
  std::vector<PosteriorSummary> summaries;
  std::vector<const TrackState*> live;
  for (const auto* t : tracks) {
    if (t->phase != TrackPhase::kActive || t->filter.empty()) continue;
    live.push_back(t);
    summaries.push_back(summarize(t->filter));
    means.emplace_back(t->id, summaries.back().mean);
  }
  const auto assignment = assign_means(means, truths);
  for (std::size_t i = 0; i < live.size(); ++i) {
    const int target_id = assignment.at(live[i]->id);
    const auto truth = std::find_if(truths.begin(), truths.end(),
                                    [&](const TargetTruth& t) { return t.target_id == target_id; });
    TrackMetric m;
    m.track_id = live[i]->id;
    m.target_id = target_id;
    m.summary = summaries[i];
    m.rmse_mean_dist_m = (summaries[i].mean - truth->centre).norm();
    m.rmse_particle_m = rmse_particle(live[i]->filter, truth->centre);
    m.nlpd = nlpd(summaries[i], truth->centre);
    step.tracks.push_back(m);
  }
  return step;
}

RunAggregate aggregate(const std::vector<StepMetric>& run, std::pair<double, double> window) {
  RunAggregate agg;
  double window_sum = 0.0;
  std::size_t window_n = 0;
  auto keep_min = [](std::optional<double>& slot, double x) { slot = slot ? std::min(*slot, x) : x; };
  for (const auto& step : run) {
    const auto rmse = step.mean_rmse_mean_dist();
    if (!rmse) continue;
    keep_min(agg.rmse_min, *rmse);
    keep_min(agg.rmse_particle_min, *step.mean_rmse_particle());
    keep_min(agg.nlpd_min, *step.mean_nlpd());
    if (step.translation_m >= window.first && step.translation_m <= window.second) {
      window_sum += *rmse;
      ++window_n;
    }
  }
  if (window_n > 0) agg.rmse_window_mean = window_sum / double(window_n);
  return agg;
}

RunAggregate average_runs(const std::vector<RunAggregate>& runs) {
  auto avg = [&](std::optional<double> RunAggregate::*field) -> std::optional<double> {
    // sorted before summing
    std::vector<double> values;
    for (const auto& r : runs) {
      if (r.*field) values.push_back(*(r.*field));
    }
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const double v : values) sum += v;
    return sum / double(values.size());
  };
  RunAggregate out;
  out.rmse_min = avg(&RunAggregate::rmse_min);
  out.rmse_window_mean = avg(&RunAggregate::rmse_window_mean);
  out.nlpd_min = avg(&RunAggregate::nlpd_min);
  out.rmse_particle_min = avg(&RunAggregate::rmse_particle_min);
  return out;
}

}  // namespace pfloc
