#include "pfloc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <map>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "pfloc/errors.hpp"

namespace pfloc {

namespace fs = std::filesystem;
using nlohmann::json;

TrackingSession::TrackingSession(const CameraIntrinsics& K, const FilterParams& filter, const TrackerParams& tracker,
                                 std::uint64_t seed, std::vector<TargetTruth> truths,
                                 std::pair<double, double> window)
    : truths_(std::move(truths)), window_(window) {
  if (tracker.mode == TrackerMode::kSingle) {
    single_.emplace(K, filter, seed);
    single_view_.id = 1;
  } else {
    tracker_.emplace(K, filter, tracker, seed);
  }
  record_.seed = seed;
}

std::vector<const TrackState*> TrackingSession::active_tracks() {
  if (tracker_) return tracker_->active_tracks();
  if (!single_->active()) return {};
  single_view_.phase = TrackPhase::kActive;
  single_view_.activated_frame = single_->activated_frame();
  single_view_.filter = single_->particles();
  return {&single_view_};
}

void TrackingSession::consume(const FrameRecord& frame) {
  if (tracker_) {
    tracker_->update(frame);
  } else {
    single_->update(frame);
  }
  const auto active = active_tracks();
  for (const auto* t : active) {
    record_.estimates.push_back({frame.index, frame.translation_m, t->id, summarize(t->filter)});
  }
  if (!truths_.empty()) {
    // A track is scored from the frame after its initialisation onwards.
    std::vector<const TrackState*> scored;
    for (const auto* t : active) {
      if (t->activated_frame < frame.index) scored.push_back(t);
    }
    record_.steps.push_back(evaluate_step(frame.index, frame.translation_m, scored, truths_));
  }
}

RunRecord TrackingSession::finish() {
  record_.aggregate = aggregate(record_.steps, window_);
  const auto active = active_tracks();
  const auto assignment = assign_tracks(active, truths_);
  for (const auto* t : active) {
    FinalTrack f;
    f.id = t->id;
    f.mean = particle_mean(t->filter);
    if (auto it = assignment.find(t->id); it != assignment.end()) f.target_id = it->second;
    record_.final_tracks.push_back(f);
  }
  return std::move(record_);
}

std::vector<TargetTruth> truths_from(const SimulationConfig& sim) {
  std::vector<TargetTruth> out;
  for (std::size_t i = 0; i < sim.targets.size(); ++i) out.push_back({int(i) + 1, sim.targets[i].centre});
  return out;
}

RunRecord run_seed(const ScenarioConfig& cfg, std::uint64_t seed, const FrameObserver& observer) {
  TrackingSession session(cfg.sim.camera, cfg.filter, cfg.tracker, seed, truths_from(cfg.sim), cfg.window);
  ScenarioStream stream(cfg.sim, seed);
  while (!stream.done()) {
    const FrameRecord frame = stream.next();
    if (observer) observer(frame);
    session.consume(frame);
  }
  return session.finish();
}

namespace {

std::string fmt_opt(const std::optional<double>& x) { return x ? fmt::format("{}", *x) : std::string(); }

// -0 -> 0
double clean(double x) { return x == 0.0 ? 0.0 : x; }

json pose_json(const CameraPose& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({clean(pose.rotation(r, 0)), clean(pose.rotation(r, 1)), clean(pose.rotation(r, 2))});
  }
  return {{"position", {clean(pose.position.x()), clean(pose.position.y()), clean(pose.position.z())}},
          {"rotation", rot}};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string seed_dir_name(std::uint64_t seed) { return fmt::format("seed_{}", seed); }

template <typename T>
void run_parallel(std::size_t count, T&& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_run_outputs(const fs::path& dir, const RunRecord& run, bool with_metrics) {
  ensure_dir(dir);
  if (with_metrics) write_steps_csv(dir / "steps.csv", run.steps);
  write_estimates_ndjson(dir / "estimates.ndjson", run.estimates);
}

}  // namespace

void write_steps_csv(const fs::path& path, const std::vector<StepMetric>& steps) {
  auto out = open_out(path);
  out << "frame,translation_m,track_id,target_id,rmse_mean_dist_m,rmse_particle_m,nlpd\n";
  for (const auto& s : steps) {
    for (const auto& t : s.tracks) {
      out << fmt::format("{},{},{},{},{},{},{}\n", s.frame, s.translation_m, t.track_id, t.target_id,
                         t.rmse_mean_dist_m, t.rmse_particle_m, t.nlpd);
    }
  }
}

void write_estimates_ndjson(const fs::path& path, const std::vector<EstimateRow>& rows) {
  auto out = open_out(path);
  for (const auto& r : rows) {
    json cov = json::array();
    for (int i = 0; i < 3; ++i) {
      cov.push_back({r.summary.covariance(i, 0), r.summary.covariance(i, 1), r.summary.covariance(i, 2)});
    }
    const json row = {{"frame", r.frame},
                      {"translation_m", r.translation_m},
                      {"track_id", r.track_id},
                      {"mean", {r.summary.mean.x(), r.summary.mean.y(), r.summary.mean.z()}},
                      {"covariance", cov}};
    out << row.dump() << '\n';
  }
}

void write_summary_csv(const fs::path& path, const ScenarioConfig& cfg, const RunAggregate& summary) {
  auto out = open_out(path);
  const auto& sn = cfg.sim.segmentation_noise;
  out << "N_T,Max_nu_rot_deg,Max_nu_t_m,rho_FP,delta_rho_FP,Max_FP,rho_FN,rho_PFN,delta_rho_PFN,"
         "RMSE_min_m,RMSE_200_1k_m,NLPD_min\n";
  out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", cfg.sim.targets.size(), cfg.sim.pose_noise.max_rot_deg,
                     cfg.sim.pose_noise.max_trans_m, sn.rho_fp, sn.delta_rho_fp, sn.max_fp, sn.rho_fn, sn.rho_pfn,
                     sn.delta_rho_pfn, fmt_opt(summary.rmse_min), fmt_opt(summary.rmse_window_mean),
                     fmt_opt(summary.nlpd_min));
}

void write_runs_csv(const fs::path& path, const std::vector<RunRecord>& runs) {
  auto out = open_out(path);
  out << "seed,rmse_min_m,rmse_window_mean_m,nlpd_min,rmse_particle_min_m,final_active_tracks\n";
  for (const auto& r : runs) {
    out << fmt::format("{},{},{},{},{},{}\n", r.seed, fmt_opt(r.aggregate.rmse_min),
                       fmt_opt(r.aggregate.rmse_window_mean), fmt_opt(r.aggregate.nlpd_min),
                       fmt_opt(r.aggregate.rmse_particle_min), r.final_tracks.size());
  }
}

ExperimentResult run_experiment(const ScenarioConfig& cfg, const std::optional<fs::path>& out_dir) {
  if (out_dir) ensure_dir(*out_dir);
  ExperimentResult result;
  result.runs.resize(static_cast<std::size_t>(cfg.n_seeds));
  run_parallel(result.runs.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.base_seed + i;
    FrameObserver observer;
    std::vector<PoseLogEntry> poses;
    std::unique_ptr<std::ofstream> frames_out;
    fs::path dir;
    if (out_dir) dir = *out_dir / seed_dir_name(seed);
    if (out_dir && cfg.output.dump_frames) {
      ensure_dir(dir / "masks");
      frames_out = std::make_unique<std::ofstream>(open_out(dir / "frames.ndjson"));
      observer = [&](const FrameRecord& f) {
        const json row = {{"index", f.index},
                          {"translation_m", f.translation_m},
                          {"reported_pose", pose_json(f.reported_pose)},
                          {"true_pose", pose_json(f.true_pose)},
                          {"positive_pixels", f.mask.count()}};
        *frames_out << row.dump() << '\n';
        poses.push_back(entry_from_pose(f.index, f.reported_pose));
        if (f.index % cfg.output.dump_stride == 0) {
          write_mask_pgm(dir / "masks" / fmt::format("{:06d}.pgm", f.index), f.mask);
        }
      };
    }
    result.runs[i] = run_seed(cfg, seed, observer);
    if (out_dir) {
      write_run_outputs(dir, result.runs[i], true);
      if (cfg.output.dump_frames) write_pose_log(dir / "poses.csv", poses);
    }
  });

  std::vector<RunAggregate> aggs;
  for (const auto& r : result.runs) aggs.push_back(r.aggregate);
  result.summary = average_runs(aggs);
  if (out_dir) {
    write_runs_csv(*out_dir / "runs.csv", result.runs);
    write_summary_csv(*out_dir / "summary.csv", cfg, result.summary);
  }
  return result;
}

PoseLogEntry entry_from_pose(long long frame_id, const CameraPose& pose) {
  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  const Eigen::Matrix3d c = pose.rotation.transpose();  // camera to world
  PoseLogEntry e;
  e.frame_id = frame_id;
  e.centre = pose.position;
  e.pitch_deg = clean(std::asin(std::clamp(-c(1, 2), -1.0, 1.0)) * kRadToDeg);
  e.yaw_deg = clean(std::atan2(c(0, 2), c(2, 2)) * kRadToDeg);
  e.roll_deg = clean(std::atan2(c(1, 0), c(1, 1)) * kRadToDeg);
  return e;
}

std::vector<TargetTruth> load_truth_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TargetTruth> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      header = true;
      continue;
    }
    TargetTruth t;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(line);
    if (!(ss >> t.target_id >> c1 >> t.centre.x() >> c2 >> t.centre.y() >> c3 >> t.centre.z()) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw ParseError("expected target_id,x,y,z", line_no);
    }
    out.push_back(t);
  }
  return out;
}

namespace {

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    log << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    log << "data error: " << e.what() << '\n';
    return kExitDataError;
  }
}

std::optional<long long> numeric_stem(const fs::path& p) {
  const std::string stem = p.stem().string();
  if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::nullopt;
  }
  return std::stoll(stem);
}

// Picks, for each multiple of step_m along the cumulative path, the first
// frame at or after it. Returns (frame id, translation) pairs.
std::vector<std::pair<long long, double>> select_frames(const std::vector<PoseLogEntry>& poses, double step_m) {
  constexpr double kEps = 1e-6;
  std::vector<std::pair<long long, double>> out;
  double travelled = 0.0;
  double next_boundary = 0.0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (i > 0) travelled += (poses[i].centre - poses[i - 1].centre).norm();
    if (travelled + kEps < next_boundary) continue;
    out.emplace_back(poses[i].frame_id, travelled);
    next_boundary = (std::floor((travelled + kEps) / step_m) + 1.0) * step_m;
  }
  return out;
}

}  // namespace

int cli_simulate(const SimulateOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    ScenarioConfig cfg = load_config(opts.config);
    if (opts.seeds) cfg.n_seeds = *opts.seeds;
    if (opts.base_seed) cfg.base_seed = *opts.base_seed;
    if (opts.dump_frames) cfg.output.dump_frames = *opts.dump_frames;
    if (opts.dump_stride) cfg.output.dump_stride = *opts.dump_stride;
    cfg.validate();
    const auto result = run_experiment(cfg, opts.out);
    log << fmt::format("{}: {} seed(s), RMSE min {} m, RMSE window mean {} m, NLPD min {}\n", cfg.name,
                       cfg.n_seeds, fmt_opt(result.summary.rmse_min), fmt_opt(result.summary.rmse_window_mean),
                       fmt_opt(result.summary.nlpd_min));
    return int(kExitOk);
  });
}

int cli_track(const TrackOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    ScenarioConfig cfg = load_config(opts.config);
    if (opts.base_seed) cfg.base_seed = *opts.base_seed;
    const auto poses = load_pose_log(opts.pose_log);

    std::map<long long, fs::path> masks;
    if (!fs::is_directory(opts.mask_dir)) throw IoError("not a directory: " + opts.mask_dir.string());
    for (const auto& entry : fs::directory_iterator(opts.mask_dir)) {
      if (entry.path().extension() != ".pgm") continue;
      if (const auto id = numeric_stem(entry.path())) masks[*id] = entry.path();
    }
    std::map<long long, const PoseLogEntry*> by_id;
    for (const auto& p : poses) by_id[p.frame_id] = &p;
    for (const auto& [id, _] : masks) {
      if (!by_id.count(id)) throw FrameMismatch(id, "mask has no pose log entry");
    }
    for (const auto& p : poses) {
      if (!masks.count(p.frame_id)) throw FrameMismatch(p.frame_id, "pose log entry has no mask");
    }

    std::vector<FrameRecord> frames;
    for (const auto& [id, translation] : select_frames(poses, cfg.sim.trajectory.step_m)) {
      FrameRecord f;
      f.index = id;
      f.translation_m = translation;
      f.reported_pose = pose_from_entry(*by_id.at(id));
      f.true_pose = f.reported_pose;
      f.mask = read_mask_pgm(masks.at(id));
      if (f.mask.width() != cfg.sim.camera.width || f.mask.height() != cfg.sim.camera.height) {
        throw FrameMismatch(id, "mask size differs from camera intrinsics");
      }
      frames.push_back(std::move(f));
    }

    std::vector<TargetTruth> truths;
    if (opts.truth) truths = load_truth_csv(*opts.truth);

    ensure_dir(opts.out);
    std::vector<RunRecord> runs(static_cast<std::size_t>(cfg.n_seeds));
    run_parallel(runs.size(), [&](std::size_t i) {
      TrackingSession session(cfg.sim.camera, cfg.filter, cfg.tracker, cfg.base_seed + i, truths, cfg.window);
      for (const auto& f : frames) session.consume(f);
      runs[i] = session.finish();
      write_run_outputs(opts.out / seed_dir_name(runs[i].seed), runs[i], !truths.empty());
    });
    if (!truths.empty()) {
      write_runs_csv(opts.out / "runs.csv", runs);
      std::vector<RunAggregate> aggs;
      for (const auto& r : runs) aggs.push_back(r.aggregate);
      write_summary_csv(opts.out / "summary.csv", cfg, average_runs(aggs));
    }
    log << fmt::format("tracked {} frame(s) over {} seed(s)\n", frames.size(), runs.size());
    return int(kExitOk);
  });
}

int cli_segment(const SegmentOptions& opts, std::ostream& log) {
  return guarded(log, [&] {
    if (opts.params.threshold < 0 || opts.params.threshold > 255) {
      throw ConfigError("threshold", "must lie in [0, 255]");
    }
    if (opts.params.erode_iterations < 0) throw ConfigError("erode", "must be >= 0");
    if (opts.params.dilate_iterations < 0) throw ConfigError("dilate", "must be >= 0");
    if (!fs::is_directory(opts.image_dir)) throw IoError("not a directory: " + opts.image_dir.string());
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(opts.image_dir)) {
      if (entry.path().extension() == ".pgm") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());
    ensure_dir(opts.out);
    for (const auto& path : images) {
      write_mask_pgm(opts.out / path.filename(), segment_image(read_pgm(path), opts.params));
    }
    log << fmt::format("segmented {} image(s)\n", images.size());
    return int(kExitOk);
  });
}

}  // namespace pfloc
