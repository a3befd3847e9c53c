#pragma once

#include <filesystem>
#include <vector>

#include "pfloc/geometry.hpp"
#include "pfloc/image.hpp"

namespace pfloc {

/// Signed x-derivative Sobel response, kernel [[-1,0,1],[-2,0,2],[-1,0,1]],
/// replicate-padded borders. Throws ImageTooSmall below 3x3.
std::vector<int> sobel_horizontal_response(const GrayImage& img);
/// |response| clamped to 0..255.
GrayImage sobel_horizontal(const GrayImage& img);

/// Bit set iff sample >= t.
BinaryMask threshold(const GrayImage& img, int t);

// 3x3 full structuring element; pixels outside the frame count as background.
BinaryMask erode(const BinaryMask& mask, int iterations);
BinaryMask dilate(const BinaryMask& mask, int iterations);

struct SegmentationParams {
  int threshold = 64;
  int erode_iterations = 1;
  int dilate_iterations = 2;
};

/// sobel -> threshold -> erode -> dilate.
BinaryMask segment_image(const GrayImage& img, const SegmentationParams& params);

struct PoseLogEntry {
  long long frame_id = 0;
  WorldPoint centre = WorldPoint::Zero();
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
};

/// Reads `frame_id,x,y,z,roll,pitch,yaw` rows after a header line. Blank
/// lines are skipped. Throws ParseError or NonMonotonicFrameIds.
std::vector<PoseLogEntry> load_pose_log(const std::filesystem::path& path);
std::vector<PoseLogEntry> parse_pose_log(std::istream& in);
void write_pose_log(const std::filesystem::path& path, const std::vector<PoseLogEntry>& entries);

CameraPose pose_from_entry(const PoseLogEntry& e);

}  // namespace pfloc
