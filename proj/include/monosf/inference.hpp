#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monosf/scene_model.hpp"

namespace monosf {

struct InferenceConfig {
  int iterations = 10;
  int motion_particles = 5;
  int normal_particles = 10;
  double normal_sigma = 0.01;  // proposal std for plane normals (1/m)
  double rot_sigma = 0.005;    // proposal std for rotation increments (radians)
  double trans_sigma = 0.02;   // proposal std for translations (meters)
  double decay = 0.7;          // proposal std multiplier per iteration
  int sweeps = 1;              // message sweeps per iteration
  uint64_t seed = 0;
  int threads = 1;

  bool valid() const {
    return iterations >= 1 && motion_particles >= 1 && normal_particles >= 1 &&
           decay > 0 && decay <= 1 && sweeps >= 1 && threads >= 1;
  }
};

struct EnergyTraceRow {
  int iteration = 0;  // 0 is the initial state
  double total = 0, unary = 0, pairwise = 0;
};

struct OptimizeResult {
  std::vector<EnergyTraceRow> trace;
};

// Particle max-product belief propagation over the superpixel graph with a
// per-body coordinate-descent phase. Each iteration draws fresh particle
// sets around the incumbents (the incumbent itself is always candidate 0),
// runs forward/backward message sweeps, and commits candidates one by one,
// each only if it does not increase the energy of the terms it touches, so
// the committed-state energy trace is non-increasing. Ties keep the lowest
// particle index. Throws if a plane has non-positive depth at its superpixel
// centroid on entry.
OptimizeResult optimize(SceneState& state, const InferenceConfig& cfg);

// CSV with header "iteration,total,unary,pairwise".
void save_energy_trace(const std::string& path, const std::vector<EnergyTraceRow>& trace);

}  // namespace monosf
