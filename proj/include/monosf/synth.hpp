#pragma once

#include <string>
#include <vector>

#include "monosf/depth_map.hpp"
#include "monosf/geometry.hpp"
#include "monosf/image.hpp"
#include "monosf/matches.hpp"
#include "monosf/scene_model.hpp"

namespace monosf {

// One textured planar patch: an image-space polygon in frame 0, the plane it
// lies on, and the rigid body that moves it. Regions paint in order, later
// regions over earlier ones; region 0 must cover the image.
struct SynthRegion {
  std::string name;
  std::vector<Vec2> polygon;
  PlaneParam plane;
  int body = 0;
};

// Noise model for the emitted depth priors.
struct PriorNoiseModel {
  double mu_rel_std = 0.05;    // relative std of the mean perturbation
  double sigma_floor = 0.002;  // minimum generating sigma (1/m)
  double miscalibration = 1.0; // factor applied to the *stored* sigma
  double outlier_prob = 0.0;   // chance of an extra wrong-depth component
  int components = 8;
};

struct TextureParams {
  int octaves = 4;
  double contrast = 0.85;  // in (0, 1]
};

struct SynthConfig {
  CameraIntrinsics intrinsics;
  std::vector<SynthRegion> regions;
  std::vector<RigidBody> bodies;
  TextureParams texture;
  PriorNoiseModel noise;
  int match_grid_step = 8;
  int calib_stride = 4;
  uint64_t seed = 1;
};

// Everything the renderer knows exactly.
struct SynthFixture {
  GrayImage image0, image1;
  LabelImage masks0, masks1;         // instance labels (0 = background)
  SceneFlowField gt;                 // frame-0 based d0/d1/flow
  std::vector<double> frame1_inv_depth;  // per frame-1 pixel
  std::vector<uint8_t> disocc1;          // frame-1 pixels with no frame-0 source
  std::vector<uint8_t> photo_consistent0;  // frame-0 pixels observable in frame 1
  std::vector<SparseMatch> matches;        // exact flow sampled on a grid
  std::vector<int> region_of_pixel;        // frame-0 region index per pixel
};

// Renders frame 0 procedurally and frame 1 by inverse warping through the
// exact per-region homographies with a nearest-surface test; disoccluded
// frame-1 pixels get fresh texture and a flag.
SynthFixture render_pair(const SynthConfig& cfg);

struct SynthPriors {
  DepthDistMap prior0, prior1;
  std::vector<CalibSample> samples;
};

// Builds per-pixel mixtures whose dominant component is centered at the GT
// inverse depth perturbed per the noise model. With miscalibration 1 and no
// outliers the emitted samples are exactly calibrated by construction.
SynthPriors make_priors(const SceneFlowField& gt, const std::vector<double>& frame1_inv_depth,
                        const PriorNoiseModel& noise, uint64_t seed, int calib_stride);

// Standalone calibration-sample generator over a generic inverse-depth range;
// same per-sample construction as make_priors.
std::vector<CalibSample> make_calib_samples(size_t n, const PriorNoiseModel& noise,
                                            uint64_t seed);

// key=value synth configuration (see README for the key set).
SynthConfig parse_synth_config(const std::string& path);

// Writes images, masks, priors, calibration samples, matches, GT maps and a
// manifest into `dir` (created if missing).
void write_fixture(const std::string& dir, const SynthConfig& cfg, const SynthFixture& fx,
                   const SynthPriors& priors);

// Builds the GT SceneState over the renderer's regions (one superpixel per
// region pixel-set, exact planes and motions); used by consistency tests.
SceneState make_gt_scene_state(const SynthConfig& cfg, const SynthFixture& fx,
                               const DepthDistMap& prior0, const DepthDistMap& prior1,
                               const EnergyWeights& weights);

}  // namespace monosf
