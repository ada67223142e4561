#pragma once

#include <string>
#include <vector>

#include "monosf/config.hpp"
#include "monosf/inference.hpp"
#include "monosf/init.hpp"
#include "monosf/metrics.hpp"
#include "monosf/scene_model.hpp"

namespace monosf {

// Full run configuration: energy weights, solver settings, evaluation
// settings and input/output paths, from a key=value file plus overrides.
struct RunConfig {
  EnergyWeights weights = EnergyWeights::defaults();
  InferenceConfig inference;
  InitConfig init;

  double eval_baseline_m = 0.54;  // disparity = baseline * fx * inverse depth
  double eval_abs_px = 3.0;
  double eval_rel = 0.05;
  double eval_mre_cap_m = 50.0;
  bool eval_keep_disocc = false;  // keep disoccluded pixels in the metrics

  double fx = 0, fy = 0, cx = -1, cy = -1;

  std::string image0, image1, priors0, priors1, masks0, masks1, matches, recalib, out_dir;

  // Ablations: zero the matching energy weights / degrade the priors.
  bool no_pho = false, no_svd = false, no_smooth = false;
  bool no_prob_depth = false;  // collapse mixtures to one global-sigma Gaussian
  bool no_recalib = false;     // skip applying the recalibration map

  size_t min_calib_samples = 100;

  static RunConfig from_file(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides);
  static RunConfig from_kv(KeyValueFile& kv);
};

// Replaces every mixture by a single Gaussian at its total mean with one
// shared sigma (the RMS mixture std over the map).
DepthDistMap collapse_to_global_sigma(const DepthDistMap& map);

// synth subcommand body: renders the fixture described by the synth config
// and writes the full fixture set.
void run_synth(const std::string& synth_config_path, const std::string& out_dir);

struct EstimateOutputs {
  SceneFlowField field;
  std::vector<EnergyTraceRow> trace;
  std::vector<RigidBody> bodies;
};

// estimate subcommand body: init (pairing, motions, superpixels, planes),
// belief-propagation refinement, and PFM/CSV outputs under cfg.out_dir.
EstimateOutputs run_estimate(const RunConfig& cfg);

// calibrate subcommand body: fits a recalibration map to a MOGC sample file;
// optionally writes a calibration-curve CSV at the given levels.
struct CalibrateOutputs {
  double nll_before = 0, nll_after = 0;
};
CalibrateOutputs run_calibrate(const std::string& samples_path, const std::string& out_map_path,
                               const std::string& curve_csv_path,
                               const std::vector<double>& levels, size_t min_samples);

// eval subcommand body: KITTI-style rates of an estimate directory against a
// ground-truth directory; writes the metrics CSV when a path is given.
MetricsReport run_eval(const std::string& est_dir, const std::string& gt_dir,
                       const RunConfig& cfg, const std::string& out_csv_path);

}  // namespace monosf
