#pragma once

#include <cstdint>
#include <vector>

#include "monosf/census.hpp"
#include "monosf/depth_map.hpp"
#include "monosf/geometry.hpp"

namespace monosf {

struct PixelCoord {
  int x = 0, y = 0;
  bool operator==(const PixelCoord&) const = default;
};

// Contiguous image region owning one plane and one rigid body. Pixel lists
// are row-major; neighbor entries are sorted by id and boundary sets are
// symmetric (B_{k,l} == B_{l,k}).
struct Superpixel {
  int id = 0;
  int body_id = 0;
  std::vector<PixelCoord> pixels;
  std::vector<std::pair<int, std::vector<PixelCoord>>> neighbors;
};

enum class BodyKind { Background, Object };

struct RigidBody {
  int id = 0;
  BodyKind kind = BodyKind::Background;
  RigidMotion motion;
};

// One weight/cap set; contexts select between background, object and
// cross-body instances of this struct.
struct TermWeights {
  double theta_pho = 1.0;     // photometric
  double theta_svd = 0.4;     // single-view depth
  double theta_depth = 0.1;   // depth smoothness
  double theta_orient = 5.0;  // orientation smoothness
  double tau_pho = 20.0;      // photometric cap, in (0, 24]
  double tau_depth = 0.05;    // depth-difference cap (1/m)
  double tau_orient = 0.3;    // orientation cap, in (0, 1]
};

struct EnergyWeights {
  TermWeights background;
  TermWeights object;
  TermWeights cross;  // adjacent planes of different bodies

  // Cross-boundary context halves the smoothness weights.
  static EnergyWeights defaults();
};

// Per-pixel output representation: inverse depth at both times plus optical
// flow. Valid pixels have positive depth at both times.
struct SceneFlowField {
  int width = 0, height = 0;
  std::vector<double> d0, d1, flow_u, flow_v;
  std::vector<uint8_t> valid;

  SceneFlowField() = default;
  SceneFlowField(int w, int h)
      : width(w),
        height(h),
        d0(size_t(w) * h, 0.0),
        d1(size_t(w) * h, 0.0),
        flow_u(size_t(w) * h, 0.0),
        flow_v(size_t(w) * h, 0.0),
        valid(size_t(w) * h, 0) {}
  size_t index(int x, int y) const { return size_t(y) * width + x; }
};

// All variables and read-only evaluation data of the energy. Immutable
// during evaluation; plane/motion updates happen between rounds.
class SceneState {
 public:
  SceneState(CameraIntrinsics k, CensusMap census0, CensusMap census1, DepthDistMap prior0,
             DepthDistMap prior1, std::vector<Superpixel> superpixels,
             std::vector<PlaneParam> planes, std::vector<RigidBody> bodies,
             EnergyWeights weights);

  const CameraIntrinsics& intrinsics() const { return k_; }
  const CensusMap& census0() const { return census0_; }
  const CensusMap& census1() const { return census1_; }
  const DepthDistMap& prior0() const { return prior0_; }
  const DepthDistMap& prior1() const { return prior1_; }
  const std::vector<Superpixel>& superpixels() const { return superpixels_; }
  const std::vector<RigidBody>& bodies() const { return bodies_; }
  const std::vector<PlaneParam>& planes() const { return planes_; }
  const EnergyWeights& weights() const { return weights_; }

  PlaneParam& plane(int i) { return planes_[i]; }
  RigidBody& body(int i) { return bodies_[i]; }

  const Vec3& ray(int x, int y) const { return rays_[size_t(y) * k_.width + x]; }
  double nll_cap0(int x, int y) const { return nll_cap0_[size_t(y) * k_.width + x]; }
  double nll_cap1(int x, int y) const { return nll_cap1_[size_t(y) * k_.width + x]; }

  const TermWeights& unary_weights(const Superpixel& sp) const {
    return bodies_[sp.body_id].kind == BodyKind::Background ? weights_.background
                                                            : weights_.object;
  }
  const TermWeights& pairwise_weights(const Superpixel& a, const Superpixel& b) const;

 private:
  CameraIntrinsics k_;
  CensusMap census0_, census1_;
  DepthDistMap prior0_, prior1_;
  std::vector<Superpixel> superpixels_;
  std::vector<PlaneParam> planes_;
  std::vector<RigidBody> bodies_;
  EnergyWeights weights_;
  std::vector<Vec3> rays_;  // K^-1 (x, y, 1) per pixel
  std::vector<double> nll_cap0_, nll_cap1_;
};

// Unary data term at one pixel: theta_pho * photometric + theta_svd * (svd_0
// + svd_1). Non-positive depths swap the NLL terms for the per-pixel cap and
// the photometric term for tau_pho.
double unary_energy(const SceneState& st, PixelCoord p, const PlaneParam& n,
                    const RigidMotion& t, const TermWeights& w);

// Pairwise smoothness across one shared boundary: truncated per-pixel depth
// differences plus truncated orientation dissimilarity. Symmetric in (nk, nl).
double pairwise_energy(const SceneState& st, const PlaneParam& nk, const PlaneParam& nl,
                       const std::vector<PixelCoord>& boundary, const TermWeights& w);

struct EnergyBreakdown {
  double unary = 0, pairwise = 0;
  double total() const { return unary + pairwise; }
};

// Deterministic sum: superpixels by id, pixels in stored (row-major) order,
// then neighbor pairs with k < l.
EnergyBreakdown total_energy_breakdown(const SceneState& st);
double total_energy(const SceneState& st);

// Energy of the terms touching superpixel `sp_index` if its plane were
// `candidate`: its unary sum plus pairwise terms to current neighbor planes.
double local_plane_energy(const SceneState& st, int sp_index, const PlaneParam& candidate);

SceneFlowField extract_sceneflow(const SceneState& st);

}  // namespace monosf
