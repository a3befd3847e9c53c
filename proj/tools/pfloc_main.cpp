#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pfloc/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Particle-filter localisation of distant static objects from binary masks and camera poses"};
  app.require_subcommand(1);

  pfloc::SimulateOptions sim;
  std::optional<int> seeds;
  std::optional<std::uint64_t> sim_seed;
  bool dump_frames = false;
  std::optional<int> dump_stride;
  auto* simulate = app.add_subcommand("simulate", "Run a simulated experiment over several seeds");
  simulate->add_option("--config", sim.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--seeds", seeds, "Number of seeds (overrides run.n_seeds)");
  simulate->add_option("--base-seed", sim_seed, "First seed (overrides run.base_seed)");
  simulate->add_flag("--dump-frames", dump_frames, "Write masks, poses and frame metadata");
  simulate->add_option("--dump-stride", dump_stride, "Write every k-th mask when dumping");

  pfloc::TrackOptions track;
  std::optional<std::string> truth;
  std::optional<std::uint64_t> track_seed;
  auto* trk = app.add_subcommand("track", "Run the tracker on mask PGMs and a pose log");
  trk->add_option("--masks", track.mask_dir, "Directory of <frame_id>.pgm masks")->required();
  trk->add_option("--poses", track.pose_log, "Pose log CSV")->required();
  trk->add_option("--config", track.config, "Scenario JSON (camera, filter, tracker, run)")->required()->check(CLI::ExistingFile);
  trk->add_option("--out", track.out, "Output directory")->required();
  trk->add_option("--truth", truth, "Ground-truth CSV target_id,x,y,z");
  trk->add_option("--base-seed", track_seed, "First seed (overrides run.base_seed)");

  pfloc::SegmentOptions seg;
  auto* segment = app.add_subcommand("segment", "Convert grayscale PGM frames to binary masks");
  segment->add_option("--images", seg.image_dir, "Directory of PGM frames")->required();
  segment->add_option("--out", seg.out, "Output directory")->required();
  segment->add_option("--threshold", seg.params.threshold, "Binarisation threshold 0-255")->capture_default_str();
  segment->add_option("--erode", seg.params.erode_iterations, "Erosion iterations")->capture_default_str();
  segment->add_option("--dilate", seg.params.dilate_iterations, "Dilation iterations")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pfloc::kExitConfigError;
  }

  if (*simulate) {
    sim.seeds = seeds;
    sim.base_seed = sim_seed;
    if (dump_frames) sim.dump_frames = true;
    sim.dump_stride = dump_stride;
    return pfloc::cli_simulate(sim, std::cerr);
  }
  if (*trk) {
    if (truth) track.truth = *truth;
    track.base_seed = track_seed;
    return pfloc::cli_track(track, std::cerr);
  }
  return pfloc::cli_segment(seg, std::cerr);
}
