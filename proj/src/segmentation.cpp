#include "pfloc/segmentation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "pfloc/errors.hpp"

namespace pfloc {

std::vector<int> sobel_horizontal_response(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw ImageTooSmall(img.width, img.height);
  const int w = img.width, h = img.height;
  auto px = [&](int u, int v) {
    return static_cast<int>(img.at(std::clamp(u, 0, w - 1), std::clamp(v, 0, h - 1)));
  };
  std::vector<int> out(std::size_t(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int right = px(u + 1, v - 1) + 2 * px(u + 1, v) + px(u + 1, v + 1);
      const int left = px(u - 1, v - 1) + 2 * px(u - 1, v) + px(u - 1, v + 1);
      out[std::size_t(v) * w + u] = right - left;
    }
  }
  return out;
}

GrayImage sobel_horizontal(const GrayImage& img) {
  const auto resp = sobel_horizontal_response(img);
  GrayImage out(img.width, img.height);
  for (std::size_t i = 0; i < resp.size(); ++i) {
    out.samples[i] = static_cast<std::uint8_t>(std::min(std::abs(resp[i]), 255));
  }
  return out;
}

BinaryMask threshold(const GrayImage& img, int t) {
  BinaryMask mask(img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) mask.set_at(i, img.samples[i] >= t);
  return mask;
}

namespace {

// One pass of 3x3 morphology. Erosion needs all nine neighbours set, dilation
// any one; off-frame neighbours are background in both cases.
BinaryMask morph_once(const BinaryMask& in, bool erode_pass) {
  const int w = in.width(), h = in.height();
  BinaryMask out(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      bool all = true, any = false;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int nu = u + du, nv = v + dv;
          const bool on = in.contains(nu, nv) && in.get(nu, nv);
          all = all && on;
          any = any || on;
        }
      }
      out.set(u, v, erode_pass ? all : any);
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph_once(out, true);
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask out = mask;
  for (int i = 0; i < iterations; ++i) out = morph_once(out, false);
  return out;
}

BinaryMask segment_image(const GrayImage& img, const SegmentationParams& params) {
  return dilate(erode(threshold(sobel_horizontal(img), params.threshold), params.erode_iterations),
                params.dilate_iterations);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, std::size_t line, const char* column) {
  const std::string t = trim(cell);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x)) {
    throw ParseError(std::string("invalid ") + column + " '" + t + "'", line);
  }
  return x;
}

}  // namespace

std::vector<PoseLogEntry> parse_pose_log(std::istream& in) {
  std::vector<PoseLogEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (trim(line).rfind("frame_id", 0) != 0) throw ParseError("expected header starting with frame_id", line_no);
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 7) {
      throw ParseError("expected 7 columns, found " + std::to_string(cells.size()), line_no);
    }
    PoseLogEntry e;
    const std::string id = trim(cells[0]);
    const auto res = std::from_chars(id.data(), id.data() + id.size(), e.frame_id);
    if (id.empty() || res.ec != std::errc() || res.ptr != id.data() + id.size()) {
      throw ParseError("invalid frame_id '" + id + "'", line_no);
    }
    e.centre = {parse_double(cells[1], line_no, "x"), parse_double(cells[2], line_no, "y"),
                parse_double(cells[3], line_no, "z")};
    e.roll_deg = parse_double(cells[4], line_no, "roll");
    e.pitch_deg = parse_double(cells[5], line_no, "pitch");
    e.yaw_deg = parse_double(cells[6], line_no, "yaw");
    if (!entries.empty() && e.frame_id <= entries.back().frame_id) throw NonMonotonicFrameIds(e.frame_id);
    entries.push_back(e);
  }
  if (!header_seen) throw ParseError("empty pose log", line_no);
  return entries;
}

std::vector<PoseLogEntry> load_pose_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_pose_log(in);
}

void write_pose_log(const std::filesystem::path& path, const std::vector<PoseLogEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "frame_id,x,y,z,roll,pitch,yaw\n";
  for (const auto& e : entries) {
    out << fmt::format("{},{},{},{},{},{},{}\n", e.frame_id, e.centre.x(), e.centre.y(), e.centre.z(),
                       e.roll_deg, e.pitch_deg, e.yaw_deg);
  }
}

CameraPose pose_from_entry(const PoseLogEntry& e) {
  return pose_from_angles(e.centre, e.roll_deg, e.pitch_deg, e.yaw_deg);
}

}  // namespace pfloc
