#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "monosf/geometry.hpp"
#include "monosf/image.hpp"

namespace monosf {

// Per-pixel 24-bit census descriptor over the 5x5 neighborhood minus the
// center. Bit b is set iff the b-th neighbor (row-major scan, center skipped)
// is strictly darker than the center; border pixels use edge-clamped reads.
struct CensusMap {
  int width = 0, height = 0;
  std::vector<uint32_t> descriptors;

  uint32_t at(int x, int y) const { return descriptors[size_t(y) * width + x]; }
};

CensusMap census_transform(const GrayImage& img);

inline int hamming24(uint32_t a, uint32_t b) { return std::popcount((a ^ b) & 0xffffffu); }

// Warps p0 by h, looks the descriptor up at the rounded target and returns
// the truncated Hamming distance. Out-of-image or behind-camera warps cost
// the full cap tau0.
double photometric_cost(const Pixel& p0, const Mat3& h, const CensusMap& census0,
                        const CensusMap& census1, double tau0);

}  // namespace monosf
