#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/SVD>
#include <sys/wait.h>
#include <unistd.h>

namespace pfloc::oracle {

namespace {

using i128 = __int128;

i128 side(const PixelIndex& a, const PixelIndex& b, std::int64_t u, std::int64_t v) {
  return i128(b.u - a.u) * (v - a.v) - i128(b.v - a.v) * (u - a.u);
}

}  // namespace

BinaryMask hull_mask(const std::vector<PixelIndex>& pts, int width, int height) {
  BinaryMask out(width, height);
  if (pts.empty()) return out;
  std::int64_t umin = pts[0].u, umax = pts[0].u, vmin = pts[0].v, vmax = pts[0].v;
  for (const auto& p : pts) {
    umin = std::min(umin, p.u);
    umax = std::max(umax, p.u);
    vmin = std::min(vmin, p.v);
    vmax = std::max(vmax, p.v);
  }
  struct HalfPlane {
    PixelIndex a, b;
    int sign;
  };
  std::vector<HalfPlane> planes;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (pts[i] == pts[j]) continue;
      bool all_pos = true, all_neg = true;
      for (const auto& q : pts) {
        const i128 s = side(pts[i], pts[j], q.u, q.v);
        all_pos = all_pos && s >= 0;
        all_neg = all_neg && s <= 0;
      }
      if (all_pos) planes.push_back({pts[i], pts[j], 1});
      if (all_neg) planes.push_back({pts[i], pts[j], -1});
    }
  }
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (u < umin || u > umax || v < vmin || v > vmax) continue;
      bool inside = true;
      for (const auto& hp : planes) {
        const i128 s = side(hp.a, hp.b, u, v);
        if ((hp.sign > 0 && s < 0) || (hp.sign < 0 && s > 0)) {
          inside = false;
          break;
        }
      }
      if (inside) out.set(u, v);
    }
  }
  return out;
}

bool project_floor(const WorldPoint& p, const CameraIntrinsics& K, const CameraPose& pose, std::int64_t& u,
                   std::int64_t& v) {
  const Eigen::Vector3d cam = pose.rotation * p - pose.rotation * pose.position;
  if (cam.z() <= kMinCameraDepth) return false;
  const Eigen::Vector3d y = K.matrix() * cam;
  u = static_cast<std::int64_t>(std::floor(y.x() / y.z()));
  v = static_cast<std::int64_t>(std::floor(y.y() / y.z()));
  return true;
}

BinaryMask render(const std::vector<CuboidTarget>& targets, const CameraIntrinsics& K, const CameraPose& pose,
                  double translation_m) {
  BinaryMask out(K.width, K.height);
  for (const auto& t : targets) {
    if (t.appear_after_m > translation_m) continue;
    std::vector<PixelIndex> pts;
    for (int i = 0; i < 8; ++i) {
      const WorldPoint c = t.centre + Eigen::Vector3d((i & 1) ? t.half_extents.x() : -t.half_extents.x(),
                                                      (i & 2) ? t.half_extents.y() : -t.half_extents.y(),
                                                      (i & 4) ? t.half_extents.z() : -t.half_extents.z());
      std::int64_t u, v;
      if (project_floor(c, K, pose, u, v)) pts.push_back({u, v});
    }
    out |= hull_mask(pts, K.width, K.height);
  }
  return out;
}

std::vector<std::int64_t> squared_distances(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::pair<int, int>> on;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (mask.get(u, v)) on.emplace_back(u, v);
    }
  }
  std::vector<std::int64_t> out(std::size_t(w) * h, std::numeric_limits<std::int64_t>::max());
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      auto& best = out[std::size_t(v) * w + u];
      for (const auto& [pu, pv] : on) {
        const std::int64_t du = u - pu, dv = v - pv;
        best = std::min(best, du * du + dv * dv);
      }
    }
  }
  return out;
}

std::vector<double> weights(const std::vector<WorldPoint>& particles, const BinaryMask& mask,
                            const CameraIntrinsics& K, const CameraPose& pose) {
  std::vector<std::pair<int, int>> on;
  for (int v = 0; v < mask.height(); ++v) {
    for (int u = 0; u < mask.width(); ++u) {
      if (mask.get(u, v)) on.emplace_back(u, v);
    }
  }
  std::vector<double> out;
  for (const auto& p : particles) {
    std::int64_t u, v;
    if (!project_floor(p, K, pose, u, v) || u < 0 || v < 0 || u >= K.width || v >= K.height) {
      out.push_back(0.0);
      continue;
    }
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& [pu, pv] : on) best = std::min(best, (u - pu) * (u - pu) + (v - pv) * (v - pv));
    out.push_back(std::exp(-static_cast<double>(best)));
  }
  return out;
}

namespace {

BinaryMask morph_once(const BinaryMask& m, bool erode_mode) {
  BinaryMask out(m.width(), m.height());
  for (int v = 0; v < m.height(); ++v) {
    for (int u = 0; u < m.width(); ++u) {
      bool all = true, any = false;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const bool on = m.contains(u + du, v + dv) && m.get(u + du, v + dv);
          all = all && on;
          any = any || on;
        }
      }
      out.set(u, v, erode_mode ? all : any);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = morph_once(m, true);
  return m;
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask m = mask;
  for (int i = 0; i < iterations; ++i) m = morph_once(m, false);
  return m;
}

WorldPoint midpoint(const Ray& r1, const Ray& r2) {
  Eigen::Matrix<double, 3, 2> A;
  A.col(0) = r1.direction;
  A.col(1) = -r2.direction;
  const Eigen::Vector2d ts = A.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(r2.origin - r1.origin);
  return 0.5 * ((r1.origin + ts(0) * r1.direction) + (r2.origin + ts(1) * r2.direction));
}

BinaryMask random_mask(int width, int height, double density, RandomStream& rng) {
  BinaryMask m(width, height);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) m.set(u, v, rng.bernoulli(density));
  }
  return m;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   ("pfloc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PFLOC_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

}  // namespace pfloc::oracle
