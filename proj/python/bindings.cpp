#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pfloc/config.hpp"
#include "pfloc/errors.hpp"
#include "pfloc/geometry.hpp"
#include "pfloc/harness.hpp"
#include "pfloc/metrics.hpp"
#include "pfloc/segmentation.hpp"
#include "pfloc/simworld.hpp"

namespace py = pybind11;
using namespace pfloc;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using MaskArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

ParticleSet to_particles(const Points& pts) {
  ParticleSet ps;
  ps.positions.reserve(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i) ps.positions.emplace_back(pts(i, 0), pts(i, 1), pts(i, 2));
  ps.weights.assign(ps.size(), ps.empty() ? 0.0 : 1.0 / double(ps.size()));
  return ps;
}

py::array_t<bool> to_array(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto r = out.mutable_unchecked<2>();
  for (int v = 0; v < m.height(); ++v) {
    for (int u = 0; u < m.width(); ++u) r(v, u) = m.get(u, v);
  }
  return out;
}

GrayImage to_image(const MaskArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D uint8 array");
  const auto r = a.unchecked<2>();
  GrayImage img(int(a.shape(1)), int(a.shape(0)));
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) img.at(u, v) = r(v, u);
  }
  return img;
}

ScenarioConfig config_from(const py::object& cfg) {
  if (py::isinstance<py::str>(cfg)) return load_config(cfg.cast<std::string>());
  const std::string text = py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  return parse_config(nlohmann::json::parse(text));
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict aggregate_dict(const RunAggregate& a) {
  py::dict d;
  d["rmse_min"] = a.rmse_min;
  d["rmse_window_mean"] = a.rmse_window_mean;
  d["nlpd_min"] = a.nlpd_min;
  d["rmse_particle_min"] = a.rmse_particle_min;
  return d;
}

py::dict run_dict(const RunRecord& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["aggregate"] = aggregate_dict(r.aggregate);
  py::list steps;
  for (const auto& s : r.steps) {
    for (const auto& t : s.tracks) {
      py::dict row;
      row["frame"] = s.frame;
      row["translation_m"] = s.translation_m;
      row["track_id"] = t.track_id;
      row["target_id"] = t.target_id;
      row["rmse_mean_dist_m"] = t.rmse_mean_dist_m;
      row["rmse_particle_m"] = t.rmse_particle_m;
      row["nlpd"] = t.nlpd;
      steps.append(row);
    }
  }
  d["steps"] = steps;
  py::list tracks;
  for (const auto& t : r.final_tracks) {
    py::dict row;
    row["id"] = t.id;
    row["mean"] = Eigen::Vector3d(t.mean);
    row["target_id"] = t.target_id;
    tracks.append(row);
  }
  d["final_tracks"] = tracks;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pfloc, m) {
  m.doc() = "Particle-filter localisation of distant static objects";

  const auto base_error = py::register_exception<Error>(m, "PflocError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def(py::init([](double fx, double fy, double cx, double cy, int width, int height) {
             CameraIntrinsics K{fx, fy, cx, cy, width, height};
             K.validate();
             return K;
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def_readwrite("width", &CameraIntrinsics::width)
      .def_readwrite("height", &CameraIntrinsics::height)
      .def("matrix", &CameraIntrinsics::matrix);

  py::class_<CameraPose>(m, "CameraPose")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix3d& R, const Eigen::Vector3d& c) { return CameraPose{R, c}; }),
           py::arg("rotation"), py::arg("position"))
      .def_readwrite("rotation", &CameraPose::rotation)
      .def_readwrite("position", &CameraPose::position)
      .def("extrinsic", &CameraPose::extrinsic);

  py::class_<Ray>(m, "Ray")
      .def(py::init([](const Eigen::Vector3d& o, const Eigen::Vector3d& d) { return Ray{o, d.normalized()}; }),
           py::arg("origin"), py::arg("direction"))
      .def_readonly("origin", &Ray::origin)
      .def_readonly("direction", &Ray::direction);

  m.def("pose_from_angles", &pose_from_angles, py::arg("centre"), py::arg("roll_deg"), py::arg("pitch_deg"),
        py::arg("yaw_deg"));

  m.def(
      "project_point",
      [](const Eigen::Vector3d& p, const CameraIntrinsics& K, const CameraPose& pose)
          -> std::optional<std::pair<double, double>> {
        const auto px = project_point(p, K, pose);
        if (!px) return std::nullopt;
        return std::pair{px->u, px->v};
      },
      py::arg("point"), py::arg("K"), py::arg("pose"),
      "Continuous (u, v) pixel coordinates, or None behind the camera.");

  m.def(
      "back_project_ray",
      [](double u, double v, const CameraIntrinsics& K, const CameraPose& pose) {
        return back_project_ray({u, v}, K, pose);
      },
      py::arg("u"), py::arg("v"), py::arg("K"), py::arg("pose"));

  m.def(
      "ray_midpoint", [](const Ray& a, const Ray& b) { return Eigen::Vector3d(ray_midpoint(a, b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "render_truth_mask",
      [](const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& cuboids, const CameraIntrinsics& K,
         const CameraPose& pose) {
        std::vector<CuboidTarget> targets;
        for (const auto& [c, h] : cuboids) targets.push_back({c, h, 0.0});
        return to_array(render_truth_mask(targets, K, pose, 0.0));
      },
      py::arg("cuboids"), py::arg("K"), py::arg("pose"),
      "Boolean (height, width) mask for a list of (centre, half_extents) cuboids.");

  m.def(
      "segment_image",
      [](const MaskArray& img, int threshold, int erode, int dilate) {
        return to_array(segment_image(to_image(img), {threshold, erode, dilate}));
      },
      py::arg("image"), py::arg("threshold") = 64, py::arg("erode") = 1, py::arg("dilate") = 2);

  m.def(
      "rmse_particle", [](const Points& pts, const Eigen::Vector3d& t) { return rmse_particle(to_particles(pts), t); },
      py::arg("particles"), py::arg("target"));
  m.def(
      "rmse_mean_dist",
      [](const Points& pts, const Eigen::Vector3d& t) { return rmse_mean_dist(to_particles(pts), t); },
      py::arg("particles"), py::arg("target"));
  m.def(
      "nlpd", [](const Points& pts, const Eigen::Vector3d& t) { return nlpd(to_particles(pts), t); },
      py::arg("particles"), py::arg("target"));

  m.def(
      "load_config", [](const py::object& cfg) { return to_py(to_json(config_from(cfg))); }, py::arg("config"),
      "Validated config with defaults filled in. Accepts a path or a dict.");

  m.def(
      "run_seed",
      [](const py::object& cfg, std::uint64_t seed) {
        const ScenarioConfig c = config_from(cfg);
        RunRecord r;
        {
          py::gil_scoped_release release;
          r = run_seed(c, seed);
        }
        return run_dict(r);
      },
      py::arg("config"), py::arg("seed"));

  m.def(
      "simulate",
      [](const py::object& cfg, std::optional<int> seeds, std::optional<std::uint64_t> base_seed,
         std::optional<std::filesystem::path> out) {
        ScenarioConfig c = config_from(cfg);
        if (seeds) c.n_seeds = *seeds;
        if (base_seed) c.base_seed = *base_seed;
        c.validate();
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(c, out);
        }
        py::dict d;
        d["summary"] = aggregate_dict(result.summary);
        py::list runs;
        for (const auto& r : result.runs) runs.append(run_dict(r));
        d["runs"] = runs;
        return d;
      },
      py::arg("config"), py::arg("seeds") = py::none(), py::arg("base_seed") = py::none(),
      py::arg("out") = py::none());
}
