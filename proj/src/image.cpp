#include "pfloc/image.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "pfloc/errors.hpp"

namespace pfloc {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

void BinaryMask::clear() { std::fill(bits_.begin(), bits_.end(), 0); }

std::optional<std::array<int, 4>> BinaryMask::bounding_box() const {
  int u0 = width_, v0 = height_, u1 = -1, v1 = -1;
  for (int v = 0; v < height_; ++v) {
    const auto* row = bits_.data() + std::size_t(v) * width_;
    for (int u = 0; u < width_; ++u) {
      if (!row[u]) continue;
      u0 = std::min(u0, u);
      u1 = std::max(u1, u);
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
  }
  if (u1 < 0) return std::nullopt;
  return std::array<int, 4>{u0, v0, u1, v1};
}

BinaryMask BinaryMask::complement() const {
  BinaryMask out = *this;
  for (auto& b : out.bits_) b = b ? 0 : 1;
  return out;
}

BinaryMask& BinaryMask::operator|=(const BinaryMask& other) {
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw IoError(path.string() + ": unsupported PGM dimensions or maxval");
  }
  GrayImage img(w, h);
  in.read(reinterpret_cast<char*>(img.samples.data()), static_cast<std::streamsize>(img.samples.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.samples.size())) {
    throw IoError(path.string() + ": truncated PGM raster");
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.samples.data()), static_cast<std::streamsize>(img.samples.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage mask_to_image(const BinaryMask& mask) {
  GrayImage img(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) img.samples[i] = mask.at(i) ? 255 : 0;
  return img;
}

void write_mask_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  write_pgm(path, mask_to_image(mask));
}

BinaryMask read_mask_pgm(const std::filesystem::path& path) {
  const GrayImage img = read_pgm(path);
  BinaryMask mask(img.width, img.height);
  for (std::size_t i = 0; i < img.samples.size(); ++i) mask.set_at(i, img.samples[i] != 0);
  return mask;
}

}  // namespace pfloc
