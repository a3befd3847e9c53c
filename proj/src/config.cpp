#include "pfloc/config.hpp"

#include <fstream>
#include <set>

#include "pfloc/errors.hpp"

namespace pfloc {

namespace {

using nlohmann::json;

// Walks one JSON object, tracking the dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), "wrong type");
    }
  }

  void get_vec3(const std::string& key, Eigen::Vector3d& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    const json& v = node_.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(field(key), "expected [x, y, z]");
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number()) throw ConfigError(field(key), "expected numbers");
      out[i] = v[i].get<double>();
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_.at(key), field(key));
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown field");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_probability(double p, const std::string& field) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
}

}  // namespace

void ScenarioConfig::validate() const {
  sim.camera.validate();
  const auto& tr = sim.trajectory;
  if (!(tr.step_m > 0.0)) throw ConfigError("trajectory.step_m", "must be > 0");
  if (!tr.start.allFinite()) throw ConfigError("trajectory.start", "must be finite");
  if (!tr.end.allFinite()) throw ConfigError("trajectory.end", "must be finite");
  if (tr.start == tr.end) throw ConfigError("trajectory.end", "must differ from trajectory.start");
  for (std::size_t i = 0; i < sim.targets.size(); ++i) {
    const auto& t = sim.targets[i];
    const std::string path = "targets[" + std::to_string(i) + "]";
    if (!t.centre.allFinite()) throw ConfigError(path + ".centre", "must be finite");
    if (!(t.half_extents.array() > 0.0).all()) throw ConfigError(path + ".half_extents", "must be > 0");
    if (!(t.appear_after_m >= 0.0)) throw ConfigError(path + ".appear_after_m", "must be >= 0");
  }
  if (!(sim.pose_noise.max_rot_deg >= 0.0)) throw ConfigError("pose_noise.max_rot_deg", "must be >= 0");
  if (!(sim.pose_noise.max_trans_m >= 0.0)) throw ConfigError("pose_noise.max_trans_m", "must be >= 0");
  const auto& sn = sim.segmentation_noise;
  require_probability(sn.rho_fp, "segmentation_noise.rho_fp");
  require_probability(sn.delta_rho_fp, "segmentation_noise.delta_rho_fp");
  require_probability(sn.rho_fn, "segmentation_noise.rho_fn");
  require_probability(sn.rho_pfn, "segmentation_noise.rho_pfn");
  require_probability(sn.delta_rho_pfn, "segmentation_noise.delta_rho_pfn");
  if (sn.max_fp < 0) throw ConfigError("segmentation_noise.max_fp", "must be >= 0");
  if (sn.fp_size_px[0] < 1 || sn.fp_size_px[0] > sn.fp_size_px[1]) {
    throw ConfigError("segmentation_noise.fp_size_px", "must satisfy 1 <= min <= max");
  }
  filter.validate();
  tracker.validate();
  if (n_seeds < 1) throw ConfigError("run.n_seeds", "must be >= 1");
  if (!(window.first <= window.second)) throw ConfigError("run.window_m", "must be [lo, hi] with lo <= hi");
  if (output.dump_stride < 1) throw ConfigError("run.dump_stride", "must be >= 1");
}

ScenarioConfig parse_config(const json& doc) {
  ScenarioConfig cfg;
  Section root(doc, "");
  root.get("name", cfg.name);

  if (root.has("camera")) {
    Section s = root.child("camera");
    auto& K = cfg.sim.camera;
    s.get("fx", K.fx);
    s.get("fy", K.fy);
    s.get("cx", K.cx);
    s.get("cy", K.cy);
    s.get("width", K.width);
    s.get("height", K.height);
    s.finish();
  }
  if (root.has("trajectory")) {
    Section s = root.child("trajectory");
    auto& tr = cfg.sim.trajectory;
    s.get_vec3("start", tr.start);
    s.get_vec3("end", tr.end);
    s.get("step_m", tr.step_m);
    if (s.has("rotation_deg")) {
      Section r = s.child("rotation_deg");
      r.get("roll", cfg.roll_deg);
      r.get("pitch", cfg.pitch_deg);
      r.get("yaw", cfg.yaw_deg);
      r.finish();
    }
    s.finish();
  }
  cfg.sim.trajectory.camera_rotation = pose_from_angles(WorldPoint::Zero(), cfg.roll_deg, cfg.pitch_deg, cfg.yaw_deg).rotation;

  if (root.has("targets")) {
    const json& arr = root.raw("targets");
    if (!arr.is_array()) throw ConfigError("targets", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section s(arr[i], "targets[" + std::to_string(i) + "]");
      CuboidTarget t;
      s.get_vec3("centre", t.centre);
      s.get_vec3("half_extents", t.half_extents);
      s.get("appear_after_m", t.appear_after_m);
      s.finish();
      cfg.sim.targets.push_back(t);
    }
  }
  if (root.has("pose_noise")) {
    Section s = root.child("pose_noise");
    s.get("max_rot_deg", cfg.sim.pose_noise.max_rot_deg);
    s.get("max_trans_m", cfg.sim.pose_noise.max_trans_m);
    s.finish();
  }
  if (root.has("segmentation_noise")) {
    Section s = root.child("segmentation_noise");
    auto& sn = cfg.sim.segmentation_noise;
    s.get("rho_fp", sn.rho_fp);
    s.get("delta_rho_fp", sn.delta_rho_fp);
    s.get("max_fp", sn.max_fp);
    s.get("rho_fn", sn.rho_fn);
    s.get("rho_pfn", sn.rho_pfn);
    s.get("delta_rho_pfn", sn.delta_rho_pfn);
    s.get("fp_size_px", sn.fp_size_px);
    s.finish();
  }
  if (root.has("filter")) {
    Section s = root.child("filter");
    auto& f = cfg.filter;
    long long n_particles = static_cast<long long>(f.n_particles);
    s.get("n_particles", n_particles);
    if (n_particles < 1) throw ConfigError("filter.n_particles", "must be >= 1");
    f.n_particles = static_cast<std::size_t>(n_particles);
    s.get("sd_init", f.sd_init);
    s.get("tau_min_obs", f.tau_min_obs);
    s.get("pred_noise_coeff", f.pred_noise_coeff);
    s.get("ref_distance_m", f.ref_distance_m);
    s.finish();
  }
  if (root.has("tracker")) {
    Section s = root.child("tracker");
    auto& t = cfg.tracker;
    std::string mode = to_string(t.mode);
    s.get("mode", mode);
    t.mode = tracker_mode_from_string(mode);
    s.get("theta_po_sd", t.theta_po_sd);
    s.get("theta_po_floor_px", t.theta_po_floor_px);
    s.get("n_dismiss", t.n_dismiss);
    s.get("n_fuse", t.n_fuse);
    long long min_px = static_cast<long long>(t.min_component_px);
    s.get("min_component_px", min_px);
    if (min_px < 1) throw ConfigError("tracker.min_component_px", "must be >= 1");
    t.min_component_px = static_cast<std::size_t>(min_px);
    s.get("match_radius_factor", t.match_radius_factor);
    s.finish();
  }
  cfg.tracker.tau_min_obs = cfg.filter.tau_min_obs;
  if (root.has("run")) {
    Section s = root.child("run");
    s.get("n_seeds", cfg.n_seeds);
    s.get("base_seed", cfg.base_seed);
    s.get("window_m", cfg.window);
    s.get("dump_frames", cfg.output.dump_frames);
    s.get("dump_stride", cfg.output.dump_stride);
    s.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ScenarioConfig& cfg) {
  const auto vec = [](const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); };
  json j;
  j["name"] = cfg.name;
  const auto& K = cfg.sim.camera;
  j["camera"] = {{"fx", K.fx}, {"fy", K.fy}, {"cx", K.cx}, {"cy", K.cy}, {"width", K.width}, {"height", K.height}};
  const auto& tr = cfg.sim.trajectory;
  j["trajectory"] = {{"start", vec(tr.start)},
                     {"end", vec(tr.end)},
                     {"step_m", tr.step_m},
                     {"rotation_deg", {{"roll", cfg.roll_deg}, {"pitch", cfg.pitch_deg}, {"yaw", cfg.yaw_deg}}}};
  j["targets"] = json::array();
  for (const auto& t : cfg.sim.targets) {
    j["targets"].push_back(
        {{"centre", vec(t.centre)}, {"half_extents", vec(t.half_extents)}, {"appear_after_m", t.appear_after_m}});
  }
  j["pose_noise"] = {{"max_rot_deg", cfg.sim.pose_noise.max_rot_deg}, {"max_trans_m", cfg.sim.pose_noise.max_trans_m}};
  const auto& sn = cfg.sim.segmentation_noise;
  j["segmentation_noise"] = {{"rho_fp", sn.rho_fp},   {"delta_rho_fp", sn.delta_rho_fp},   {"max_fp", sn.max_fp},
                             {"rho_fn", sn.rho_fn},   {"rho_pfn", sn.rho_pfn},             {"delta_rho_pfn", sn.delta_rho_pfn},
                             {"fp_size_px", sn.fp_size_px}};
  const auto& f = cfg.filter;
  j["filter"] = {{"n_particles", f.n_particles},
                 {"sd_init", f.sd_init},
                 {"tau_min_obs", f.tau_min_obs},
                 {"pred_noise_coeff", f.pred_noise_coeff},
                 {"ref_distance_m", f.ref_distance_m}};
  const auto& t = cfg.tracker;
  j["tracker"] = {{"mode", to_string(t.mode)}, {"theta_po_sd", t.theta_po_sd},       {"theta_po_floor_px", t.theta_po_floor_px},
                  {"n_dismiss", t.n_dismiss},           {"n_fuse", t.n_fuse},
                  {"min_component_px", t.min_component_px}, {"match_radius_factor", t.match_radius_factor}};
  j["run"] = {{"n_seeds", cfg.n_seeds},
              {"base_seed", cfg.base_seed},
              {"window_m", {cfg.window.first, cfg.window.second}},
              {"dump_frames", cfg.output.dump_frames},
              {"dump_stride", cfg.output.dump_stride}};
  return j;
}

}  // namespace pfloc
