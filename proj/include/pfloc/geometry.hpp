#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "pfloc/random.hpp"

namespace pfloc {

// World frame is right-handed with x right, y down, z forward. A camera with
// identity rotation looks along +z and its image rows grow with +y.
using WorldPoint = Eigen::Vector3d;

/// Continuous image coordinates: u is the column, v the row.
struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Discretised pixel cell (lattice) coordinates.
struct PixelIndex {
  std::int64_t u = 0;
  std::int64_t v = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

struct CameraIntrinsics {
  double fx = 1200.0;
  double fy = 1200.0;
  double cx = 960.0;
  double cy = 540.0;
  int width = 1920;
  int height = 1080;

  Eigen::Matrix3d matrix() const;
  bool contains(const PixelIndex& px) const {
    return px.u >= 0 && px.v >= 0 && px.u < width && px.v < height;
  }
  // Throws ConfigError naming the offending field.
  void validate() const;
};

/// Rigid pose: rotation maps world to camera, position is the camera centre.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  WorldPoint position = WorldPoint::Zero();

  Eigen::Vector3d translation() const { return -rotation * position; }
  /// The 3x4 extrinsic matrix [R t].
  Eigen::Matrix<double, 3, 4> extrinsic() const;
  bool is_valid(double tol = 1e-9) const;
};

struct PoseNoiseConfig {
  double max_rot_deg = 0.0;
  double max_trans_m = 0.0;
};

struct Ray {
  WorldPoint origin = WorldPoint::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
};

inline constexpr double kMinCameraDepth = 1e-6;

/// Projects a homogeneous world point through K*[R t]. Absent when the point
/// lies at or behind the camera plane. No clipping to the frame.
std::optional<PixelPoint> project_homogeneous(const Eigen::Vector4d& x, const CameraIntrinsics& K,
                                              const CameraPose& pose);
std::optional<PixelPoint> project_point(const WorldPoint& p, const CameraIntrinsics& K,
                                        const CameraPose& pose);

/// Floor to the containing pixel cell.
PixelIndex discretise(const PixelPoint& p);

Ray back_project_ray(const PixelPoint& px, const CameraIntrinsics& K, const CameraPose& pose);

/// Midpoint of the closest points of two infinite lines. Throws ParallelRays
/// when |d1.d2| >= 1 - 1e-9. Symmetric in its arguments.
WorldPoint ray_midpoint(const Ray& r1, const Ray& r2);

Eigen::Matrix3d rotation_x(double rad);
Eigen::Matrix3d rotation_y(double rad);
Eigen::Matrix3d rotation_z(double rad);

/// Rotation noise N_rx*N_ry*N_rz*R with per-axis uniform angles and a uniform
/// per-axis shift of the camera centre.
CameraPose perturb_pose(const CameraPose& pose, const PoseNoiseConfig& cfg, RandomStream& rng);

/// Camera pose from attitude angles in degrees. The camera-to-world rotation
/// is Ry(yaw) * Rx(pitch) * Rz(roll): yaw turns about the vertical world y
/// axis (positive toward +x), pitch about the camera x axis (positive looks
/// up), roll about the optical axis.
CameraPose pose_from_angles(const WorldPoint& centre, double roll_deg, double pitch_deg,
                            double yaw_deg);

}  // namespace pfloc
