#include "monosf/census.hpp"

#include <cmath>

#include "monosf/error.hpp"

namespace monosf {

CensusMap census_transform(const GrayImage& img) {
  if (img.width < 5 || img.height < 5)
    throw InvalidArgument("census_transform: image must be at least 5x5");
  CensusMap map;
  map.width = img.width;
  map.height = img.height;
  map.descriptors.assign(size_t(img.width) * img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      uint8_t center = img.at(x, y);
      uint32_t desc = 0;
      int bit = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (img.at_clamped(x + dx, y + dy) < center) desc |= 1u << bit;
          ++bit;
        }
      }
      map.descriptors[size_t(y) * img.width + x] = desc;
    }
  }
  return map;
}

double photometric_cost(const Pixel& p0, const Mat3& h, const CensusMap& census0,
                        const CensusMap& census1, double tau0) {
  Pixel p1;
  if (!apply_homography(h, p0, &p1)) return tau0;
  int x1 = int(std::lround(p1.u));
  int y1 = int(std::lround(p1.v));
  if (x1 < 0 || y1 < 0 || x1 >= census1.width || y1 >= census1.height) return tau0;
  int x0 = int(std::lround(p0.u));
  int y0 = int(std::lround(p0.v));
  double d = hamming24(census0.at(x0, y0), census1.at(x1, y1));
  return d < tau0 ? d : tau0;
}

}  // namespace monosf
