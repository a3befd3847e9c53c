#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pfloc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// geometry
class ParallelRays : public Error {
 public:
  ParallelRays() : Error("rays are parallel; retry initialisation with a later frame") {}
};

// pf
class WeakBaseline : public Error {
 public:
  explicit WeakBaseline(double baseline_m)
      : Error("camera baseline " + std::to_string(baseline_m) + " m is below 1 m") {}
};
class EmptyMask : public Error {
 public:
  EmptyMask() : Error("mask has no positive pixels") {}
};
class AllZeroWeights : public Error {
 public:
  AllZeroWeights() : Error("all particle weights are zero") {}
};

// segmentation_ingest
class ImageTooSmall : public Error {
 public:
  ImageTooSmall(int width, int height)
      : Error("image " + std::to_string(width) + "x" + std::to_string(height) +
              " is smaller than 3x3") {}
};
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};
class NonMonotonicFrameIds : public Error {
 public:
  explicit NonMonotonicFrameIds(long long frame_id)
      : Error("frame id " + std::to_string(frame_id) + " is not strictly increasing") {}
};

// harness
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class FrameMismatch : public Error {
 public:
  FrameMismatch(long long frame_id, const std::string& what)
      : Error("frame " + std::to_string(frame_id) + ": " + what), frame_id_(frame_id) {}
  long long frame_id() const { return frame_id_; }

 private:
  long long frame_id_;
};

}  // namespace pfloc
