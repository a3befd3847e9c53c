#include "pfloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pfloc/errors.hpp"

namespace pfloc {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kParallelTol = 1e-9;
}  // namespace

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0)) throw ConfigError("camera.fx", "must be > 0");
  if (!(fy > 0.0)) throw ConfigError("camera.fy", "must be > 0");
  if (width <= 0) throw ConfigError("camera.width", "must be > 0");
  if (height <= 0) throw ConfigError("camera.height", "must be > 0");
  if (!(cx >= 0.0 && cx <= width)) throw ConfigError("camera.cx", "must lie in [0, width]");
  if (!(cy >= 0.0 && cy <= height)) throw ConfigError("camera.cy", "must lie in [0, height]");
}

Eigen::Matrix<double, 3, 4> CameraPose::extrinsic() const {
  Eigen::Matrix<double, 3, 4> m;
  m.leftCols<3>() = rotation;
  m.col(3) = translation();
  return m;
}

bool CameraPose::is_valid(double tol) const {
  if (!rotation.allFinite() || !position.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

std::optional<PixelPoint> project_homogeneous(const Eigen::Vector4d& x, const CameraIntrinsics& K,
                                              const CameraPose& pose) {
  const Eigen::Vector3d y = K.matrix() * (pose.extrinsic() * x);
  // y3 is the camera-frame depth scaled by x4.
  if (y.z() / x.w() <= kMinCameraDepth) return std::nullopt;
  return PixelPoint{y.x() / y.z(), y.y() / y.z()};
}

std::optional<PixelPoint> project_point(const WorldPoint& p, const CameraIntrinsics& K,
                                        const CameraPose& pose) {
  const Eigen::Vector3d c = pose.rotation * (p - pose.position);
  if (c.z() <= kMinCameraDepth) return std::nullopt;
  return PixelPoint{K.fx * c.x() / c.z() + K.cx, K.fy * c.y() / c.z() + K.cy};
}

PixelIndex discretise(const PixelPoint& p) {
  constexpr double kLimit = 1e15;
  return {static_cast<std::int64_t>(std::floor(std::clamp(p.u, -kLimit, kLimit))),
          static_cast<std::int64_t>(std::floor(std::clamp(p.v, -kLimit, kLimit)))};
}

Ray back_project_ray(const PixelPoint& px, const CameraIntrinsics& K, const CameraPose& pose) {
  const Eigen::Vector3d cam_dir((px.u - K.cx) / K.fx, (px.v - K.cy) / K.fy, 1.0);
  return {pose.position, (pose.rotation.transpose() * cam_dir).normalized()};
}

WorldPoint ray_midpoint(const Ray& r1, const Ray& r2) {
  const Eigen::Vector3d& d1 = r1.direction;
  const Eigen::Vector3d& d2 = r2.direction;
  const double b = d1.dot(d2);
  if (std::abs(b) >= 1.0 - kParallelTol) throw ParallelRays();

  // Normal equations of min |o1 + s d1 - o2 - t d2|^2 for unit directions:
  //   s - b t = -d1.w,   b s - t = -d2.w,   w = o1 - o2.
  const Eigen::Vector3d w = r1.origin - r2.origin;
  const double e = d1.dot(w);
  const double f = d2.dot(w);
  const double denom = 1.0 - b * b;
  const double s = (b * f - e) / denom;
  const double t = (f - b * e) / denom;
  const WorldPoint p1 = r1.origin + s * d1;
  const WorldPoint p2 = r2.origin + t * d2;
  return 0.5 * (p1 + p2);
}

Eigen::Matrix3d rotation_x(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitX()).toRotationMatrix();
}
Eigen::Matrix3d rotation_y(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitY()).toRotationMatrix();
}
Eigen::Matrix3d rotation_z(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

CameraPose perturb_pose(const CameraPose& pose, const PoseNoiseConfig& cfg, RandomStream& rng) {
  if (cfg.max_rot_deg == 0.0 && cfg.max_trans_m == 0.0) return pose;
  const double max_rad = cfg.max_rot_deg * kDegToRad;
  const double ax = rng.uniform(-max_rad, max_rad);
  const double ay = rng.uniform(-max_rad, max_rad);
  const double az = rng.uniform(-max_rad, max_rad);
  CameraPose out;
  out.rotation = rotation_x(ax) * rotation_y(ay) * rotation_z(az) * pose.rotation;
  for (int i = 0; i < 3; ++i) {
    out.position[i] = pose.position[i] + rng.uniform(-cfg.max_trans_m, cfg.max_trans_m);
  }
  return out;
}

CameraPose pose_from_angles(const WorldPoint& centre, double roll_deg, double pitch_deg,
                            double yaw_deg) {
  const Eigen::Matrix3d cam_to_world = rotation_y(yaw_deg * kDegToRad) *
                                       rotation_x(pitch_deg * kDegToRad) *
                                       rotation_z(roll_deg * kDegToRad);
  return {cam_to_world.transpose(), centre};
}

}  // namespace pfloc
