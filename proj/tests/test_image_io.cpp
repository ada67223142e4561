#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "monosf/error.hpp"
#include "monosf/image.hpp"
#include "monosf/matches.hpp"
#include "monosf/rng.hpp"

using namespace monosf;

TEST_CASE("pgm8 round trip") {
  GrayImage img(13, 9);
  Rng rng(61);
  for (uint8_t& p : img.pixels) p = uint8_t(rng.below(256));
  save_pgm8("io_test8.pgm", img);
  GrayImage back = load_pgm8("io_test8.pgm");
  REQUIRE(back.width == img.width);
  REQUIRE(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("pgm16 round trip keeps 16-bit labels") {
  LabelImage img(7, 5);
  Rng rng(62);
  for (uint16_t& p : img.labels) p = uint16_t(rng.below(65536));
  save_pgm16("io_test16.pgm", img);
  LabelImage back = load_pgm16("io_test16.pgm");
  REQUIRE(back.width == img.width);
  CHECK(back.labels == img.labels);
}

TEST_CASE("pgm header comments are skipped; wrong maxval rejected") {
  {
    std::ofstream f("io_comment.pgm", std::ios::binary);
    f << "P5\n# a comment\n2 2\n255\n";
    f.write("\x01\x02\x03\x04", 4);
  }
  GrayImage img = load_pgm8("io_comment.pgm");
  CHECK(img.at(1, 1) == 4);
  CHECK_THROWS_AS(load_pgm16("io_comment.pgm"), IoError);
  CHECK_THROWS_AS(load_pgm8("io_missing_file.pgm"), IoError);
}

TEST_CASE("pfm round trip and bottom-up row order") {
  FloatImage img(3, 2);
  // Row 0 (top): 1 2 3, row 1 (bottom): 4 5 6.
  for (int i = 0; i < 6; ++i) img.values[i] = float(i + 1);
  save_pfm("io_test.pfm", img);
  FloatImage back = load_pfm("io_test.pfm");
  REQUIRE(back.width == 3);
  REQUIRE(back.height == 2);
  CHECK(back.values == img.values);

  // The first stored row must be the bottom image row.
  std::ifstream f("io_test.pfm", std::ios::binary);
  std::string header;
  std::getline(f, header);  // Pf
  std::getline(f, header);  // dims
  std::getline(f, header);  // scale
  float first = 0;
  f.read(reinterpret_cast<char*>(&first), 4);
  CHECK(first == 4.0f);
}

TEST_CASE("matches text round trip with comments") {
  {
    std::ofstream f("io_matches.txt");
    f << "# header comment\n";
    f << "1.5 2.25 3.0 4.75\n";
    f << "\n";
    f << "7 8 9 10 # trailing comment\n";
  }
  std::vector<SparseMatch> m = load_matches("io_matches.txt");
  REQUIRE(m.size() == 2);
  CHECK(m[0].p0.u == 1.5);
  CHECK(m[0].p1.v == 4.75);
  CHECK(m[1].p1.u == 9.0);

  save_matches("io_matches2.txt", m);
  std::vector<SparseMatch> back = load_matches("io_matches2.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[1].p0.v == 8.0);
}

TEST_CASE("malformed matches line is rejected") {
  {
    std::ofstream f("io_matches_bad.txt");
    f << "1 2 3\n";
  }
  CHECK_THROWS_AS(load_matches("io_matches_bad.txt"), IoError);
}
