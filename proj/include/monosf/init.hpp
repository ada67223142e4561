#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "monosf/census.hpp"
#include "monosf/depth_map.hpp"
#include "monosf/geometry.hpp"
#include "monosf/image.hpp"
#include "monosf/matches.hpp"
#include "monosf/scene_model.hpp"

namespace monosf {

struct InitConfig {
  double theta_reproj = 10.0;  // weight on the reprojection residuals
  double huber_width_px = 1.5;
  int lm_max_iterations = 60;
  double lm_initial_lambda = 1e-4;
  double lm_max_lambda = 1e10;
  double lm_cost_tolerance = 1e-10;      // relative decrease per accepted step
  double lm_gradient_tolerance = 1e-7;   // stationarity threshold
  int vote_threshold = 3;                // minimum votes to link instances
  int min_matches = 6;
  int superpixel_count = 60;
  int match_grid_step = 8;     // fallback matcher grid
  int match_search_radius = 64;
};

// Instance pairing + body construction. bodies[0] is always the background.
struct BodyInit {
  std::vector<RigidBody> bodies;
  std::vector<int> body_of_instance;  // frame-0 label -> body id (index 0 = background)
  std::vector<int> linked_instance1;  // per body: linked frame-1 label, -1 if none
  std::vector<std::vector<SparseMatch>> body_matches;  // label-consistent matches per body
};

// Votes each frame-0 instance's matches into frame-1 labels; a link needs a
// plurality frame-1 instance with at least cfg.vote_threshold votes (ties go
// to the lower label). Unlinked instances still become bodies; their motion
// is filled in later with the background estimate.
BodyInit pair_instances(const LabelImage& masks0, const LabelImage& masks1,
                        const std::vector<SparseMatch>& matches, const InitConfig& cfg);

// Joint pose/point refinement data for one rigid body. Points are anchored
// to their frame-0 pixel rays and parameterized by inverse depth, which
// fixes the t=0 reprojection residual at zero and removes the gauge freedom.
class MotionProblem {
 public:
  MotionProblem(const std::vector<SparseMatch>& matches, const DepthDistMap& prior0,
                const DepthDistMap& prior1, const CameraIntrinsics& k, const InitConfig& cfg);

  struct State {
    RigidMotion motion;
    std::vector<double> inv_depths;  // one per match, > 0
  };

  int num_matches() const { return int(matches_.size()); }
  // Parameter order: (rotation increment, translation increment, inverse depths).
  int num_params() const { return 6 + num_matches(); }

  // Objective value; nullopt when the state is geometrically invalid.
  std::optional<double> cost(const State& st) const;

  // Per-term energies and their gradients w.r.t. the local increment at st
  // (rotation composed on the right, everything else additive). Exposed for
  // derivative checks.
  struct Terms {
    double proj1 = 0, svd0 = 0, svd1 = 0;
    Eigen::VectorXd grad_proj1, grad_svd0, grad_svd1;  // size num_params()
  };
  std::optional<Terms> eval_terms(const State& st, int match_index) const;

  // One Levenberg-Marquardt solve from `initial`; accepted steps strictly
  // decrease the objective.
  State solve(const State& initial, double* initial_cost = nullptr,
              double* final_cost = nullptr) const;

  State make_initial(const RigidMotion& motion) const;  // depths from prior means

  static State retract(const State& st, const Eigen::VectorXd& delta);

 private:
  std::vector<SparseMatch> matches_;
  std::vector<Vec3> rays0_;
  std::vector<GaussianMixture1D> mix0_;
  const DepthDistMap* prior1_;
  CameraIntrinsics k_;
  InitConfig cfg_;
};

// LM estimation of one body's motion (Eq.-10-style objective). Requires at
// least cfg.min_matches matches; throws SolverError if damping is exhausted
// far from stationarity.
struct MotionEstimate {
  RigidMotion motion;
  std::vector<Vec3> points;
  double initial_cost = 0, final_cost = 0;
};
MotionEstimate estimate_body_motion(const std::vector<SparseMatch>& matches,
                                    const DepthDistMap& prior0, const DepthDistMap& prior1,
                                    const CameraIntrinsics& k, const InitConfig& cfg,
                                    const std::optional<RigidMotion>& initial = std::nullopt);

// Background specialization: the initial motion comes from the normalized
// 8-point algorithm with the translation scale set by the median prior depth
// of the matched points.
RigidMotion init_background_motion(const std::vector<SparseMatch>& bg_matches,
                                   const DepthDistMap& prior0, const DepthDistMap& prior1,
                                   const CameraIntrinsics& k, const InitConfig& cfg);

struct Superpixelization {
  std::vector<Superpixel> superpixels;    // ids equal indices; body_id unset (0)
  std::vector<uint16_t> instance_labels;  // owning mask label per superpixel
};

// Grid-seeded greedy segmentation on intensity + spatial distance that never
// crosses an instance boundary; neighbors/boundaries use 4-connectivity.
Superpixelization superpixelize(const GrayImage& img, const LabelImage& masks,
                                int target_count);

// Weighted linear fit of n against the prior mean inverse depths (weights =
// inverse total variance); rank-deficient systems fall back to the
// fronto-parallel plane at the weighted median inverse depth.
std::vector<PlaneParam> init_planes(const std::vector<Superpixel>& superpixels,
                                    const DepthDistMap& prior0, const CameraIntrinsics& k);

// Built-in fallback matcher: census block matching on a coarse grid.
std::vector<SparseMatch> census_block_match(const CensusMap& census0, const CensusMap& census1,
                                            int grid_step, int search_radius);

}  // namespace monosf
