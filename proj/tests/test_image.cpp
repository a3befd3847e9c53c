#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pfloc/errors.hpp"
#include "pfloc/image.hpp"

using namespace pfloc;

TEST(BinaryMask, CountBoundingBoxComplement) {
  BinaryMask m(6, 4);
  EXPECT_TRUE(m.empty());
  EXPECT_FALSE(m.bounding_box());
  m.set(1, 2);
  m.set(4, 1);
  EXPECT_EQ(m.count(), 2u);
  const auto box = m.bounding_box();
  ASSERT_TRUE(box);
  EXPECT_EQ(*box, (std::array<int, 4>{1, 1, 4, 2}));
  EXPECT_EQ(m.complement().count(), 22u);
  EXPECT_EQ(m.complement().complement(), m);
  BinaryMask n(6, 4);
  n.set(0, 0);
  n |= m;
  EXPECT_EQ(n.count(), 3u);
}

TEST(Pgm, MaskWriteIsBitExact) {
  const auto dir = oracle::temp_dir("pgm");
  BinaryMask m(3, 2);
  m.set(0, 0);
  m.set(2, 1);
  write_mask_pgm(dir / "m.pgm", m);
  const std::string expected = std::string("P5\n3 2\n255\n") + std::string("\xff\x00\x00\x00\x00\xff", 6);
  EXPECT_EQ(oracle::read_file(dir / "m.pgm"), expected);
  EXPECT_EQ(read_mask_pgm(dir / "m.pgm"), m);
}

TEST(Pgm, RoundTripRandomImage) {
  const auto dir = oracle::temp_dir("pgm");
  RandomStream rng(7);
  GrayImage img(37, 19);
  for (auto& s : img.samples) s = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  write_pgm(dir / "a.pgm", img);
  EXPECT_EQ(read_pgm(dir / "a.pgm"), img);
}

TEST(Pgm, ReadsHeaderComments) {
  const auto dir = oracle::temp_dir("pgm");
  {
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P5\n# made by hand\n2 1\n# another\n255\n";
    out.put(char(0));
    out.put(char(7));
  }
  const GrayImage img = read_pgm(dir / "c.pgm");
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.at(1, 0), 7);
  EXPECT_EQ(read_mask_pgm(dir / "c.pgm").count(), 1u);
}

TEST(Pgm, RejectsBadFiles) {
  const auto dir = oracle::temp_dir("pgm");
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
  {
    std::ofstream out(dir / "p2.pgm");
    out << "P2\n1 1\n255\n0\n";
  }
  EXPECT_THROW(read_pgm(dir / "p2.pgm"), IoError);
  {
    std::ofstream out(dir / "short.pgm", std::ios::binary);
    out << "P5\n4 4\n255\n";
    out.write("abc", 3);
  }
  EXPECT_THROW(read_pgm(dir / "short.pgm"), IoError);
  {
    std::ofstream out(dir / "deep.pgm", std::ios::binary);
    out << "P5\n1 1\n65535\n";
    out.write("ab", 2);
  }
  EXPECT_THROW(read_pgm(dir / "deep.pgm"), IoError);
}
