#pragma once

#include <string>
#include <vector>

#include "monosf/geometry.hpp"

namespace monosf {

// One sparse flow correspondence between the two frames.
struct SparseMatch {
  Pixel p0, p1;
};

// Text format: one "x0 y0 x1 y1" quadruple per line, '#' comments allowed.
std::vector<SparseMatch> load_matches(const std::string& path);
void save_matches(const std::string& path, const std::vector<SparseMatch>& matches);

}  // namespace monosf
