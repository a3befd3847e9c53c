#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pfloc/config.hpp"
#include "pfloc/metrics.hpp"
#include "pfloc/segmentation.hpp"

namespace pfloc {

/// Exit codes shared by all subcommands.
enum ExitCode : int { kExitOk = 0, kExitConfigError = 2, kExitDataError = 3 };

struct EstimateRow {
  long long frame = 0;
  double translation_m = 0.0;
  int track_id = 0;
  PosteriorSummary summary;
};

struct FinalTrack {
  int id = 0;
  WorldPoint mean = WorldPoint::Zero();
  std::optional<int> target_id;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<StepMetric> steps;  // only with ground truth
  std::vector<EstimateRow> estimates;
  RunAggregate aggregate;
  std::vector<FinalTrack> final_tracks;  // Active at the last frame
};

/// Drives a Tracker over a frame sequence and records estimates and, given
/// ground truth, per-step metrics. Shared by the simulate and track paths.
class TrackingSession {
 public:
  TrackingSession(const CameraIntrinsics& K, const FilterParams& filter, const TrackerParams& tracker,
                  std::uint64_t seed, std::vector<TargetTruth> truths, std::pair<double, double> window);

  void consume(const FrameRecord& frame);
  RunRecord finish();

 private:
  std::vector<const TrackState*> active_tracks();

  std::optional<Tracker> tracker_;
  std::optional<SingleTargetFilter> single_;
  TrackState single_view_;
  std::vector<TargetTruth> truths_;
  std::pair<double, double> window_;
  RunRecord record_;
};

std::vector<TargetTruth> truths_from(const SimulationConfig& sim);

using FrameObserver = std::function<void(const FrameRecord&)>;

/// One full scenario + tracker run for a single seed.
RunRecord run_seed(const ScenarioConfig& cfg, std::uint64_t seed, const FrameObserver& observer = {});

struct ExperimentResult {
  std::vector<RunRecord> runs;  // ordered by seed
  RunAggregate summary;
};

/// Runs seeds base_seed .. base_seed + n_seeds - 1, concurrently when the
/// hardware allows, and writes outputs under out_dir when given.
ExperimentResult run_experiment(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& out_dir);

// Output files.
void write_steps_csv(const std::filesystem::path& path, const std::vector<StepMetric>& steps);
void write_estimates_ndjson(const std::filesystem::path& path, const std::vector<EstimateRow>& rows);
/// Header and one row in the column order of the published results table.
void write_summary_csv(const std::filesystem::path& path, const ScenarioConfig& cfg, const RunAggregate& summary);
void write_runs_csv(const std::filesystem::path& path, const std::vector<RunRecord>& runs);

/// Inverse of pose_from_angles (degrees, roll/pitch/yaw).
PoseLogEntry entry_from_pose(long long frame_id, const CameraPose& pose);

/// Ground-truth target file: header `target_id,x,y,z`, one row per target.
std::vector<TargetTruth> load_truth_csv(const std::filesystem::path& path);

struct SimulateOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<int> seeds;
  std::optional<std::uint64_t> base_seed;
  std::optional<bool> dump_frames;
  std::optional<int> dump_stride;
};

struct TrackOptions {
  std::filesystem::path mask_dir;
  std::filesystem::path pose_log;
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> truth;
  std::optional<std::uint64_t> base_seed;
};

struct SegmentOptions {
  std::filesystem::path image_dir;
  std::filesystem::path out;
  SegmentationParams params;
};

int cli_simulate(const SimulateOptions& opts, std::ostream& log);
int cli_track(const TrackOptions& opts, std::ostream& log);
int cli_segment(const SegmentOptions& opts, std::ostream& log);

}  // namespace pfloc
