#include "monosf/scene_model.hpp"

#include <algorithm>
#include <cmath>

#include "monosf/error.hpp"

namespace monosf {

EnergyWeights EnergyWeights::defaults() {
  EnergyWeights w;
  w.cross.theta_depth *= 0.5;
  w.cross.theta_orient *= 0.5;
  return w;
}

SceneState::SceneState(CameraIntrinsics k, CensusMap census0, CensusMap census1,
                       DepthDistMap prior0, DepthDistMap prior1,
                       std::vector<Superpixel> superpixels, std::vector<PlaneParam> planes,
                       std::vector<RigidBody> bodies, EnergyWeights weights)
    : k_(k),
      census0_(std::move(census0)),
      census1_(std::move(census1)),
      prior0_(std::move(prior0)),
      prior1_(std::move(prior1)),
      superpixels_(std::move(superpixels)),
      planes_(std::move(planes)),
      bodies_(std::move(bodies)),
      weights_(weights) {
  if (!k_.valid()) throw InvalidArgument("SceneState: invalid intrinsics");
  if (superpixels_.empty() || planes_.size() != superpixels_.size())
    throw InvalidArgument("SceneState: need one plane per superpixel");
  if (census0_.width != k_.width || census0_.height != k_.height ||
      census1_.width != k_.width || census1_.height != k_.height)
    throw InvalidArgument("SceneState: census maps do not match intrinsics");
  if (prior0_.width() != k_.width || prior0_.height() != k_.height ||
      prior1_.width() != k_.width || prior1_.height() != k_.height)
    throw InvalidArgument("SceneState: depth maps do not match intrinsics");
  int n_background = 0;
  for (const RigidBody& b : bodies_)
    if (b.kind == BodyKind::Background) ++n_background;
  if (n_background != 1) throw InvalidArgument("SceneState: exactly one background body");
  for (size_t i = 0; i < superpixels_.size(); ++i) {
    if (superpixels_[i].id != int(i))
      throw InvalidArgument("SceneState: superpixel ids must equal their indices");
    if (superpixels_[i].body_id < 0 || superpixels_[i].body_id >= int(bodies_.size()))
      throw InvalidArgument("SceneState: superpixel references missing body");
  }

  Mat3 ki = k_.inverse_matrix();
  rays_.resize(size_t(k_.width) * k_.height);
  for (int y = 0; y < k_.height; ++y)
    for (int x = 0; x < k_.width; ++x)
      rays_[size_t(y) * k_.width + x] = ki * Vec3(x, y, 1.0);
  nll_cap0_ = prior0_.nll_caps();
  nll_cap1_ = prior1_.nll_caps();
}

const TermWeights& SceneState::pairwise_weights(const Superpixel& a, const Superpixel& b) const {
  if (a.body_id != b.body_id) return weights_.cross;
  return unary_weights(a);
}

double unary_energy(const SceneState& st, PixelCoord p, const PlaneParam& n,
                    const RigidMotion& t, const TermWeights& w) {
  const Vec3& ray = st.ray(p.x, p.y);
  double d0 = n.n.dot(ray);
  if (!(d0 > 0.0) || !std::isfinite(d0))
    return w.theta_pho * w.tau_pho + w.theta_svd * (st.nll_cap0(p.x, p.y) + st.nll_cap1(p.x, p.y));

  double svd0 = mog_nll(st.prior0().at(p.x, p.y), d0);

  Vec3 x1 = t.rotation * (ray / d0) + t.translation;
  double pho, svd1;
  if (!(x1.z() > 0.0)) {
    pho = w.tau_pho;
    svd1 = st.nll_cap1(p.x, p.y);
  } else {
    const CameraIntrinsics& k = st.intrinsics();
    double u1 = k.fx * x1.x() / x1.z() + k.cx;
    double v1 = k.fy * x1.y() / x1.z() + k.cy;
    int x1i = int(std::lround(u1)), y1i = int(std::lround(v1));
    if (x1i < 0 || y1i < 0 || x1i >= k.width || y1i >= k.height) {
      pho = w.tau_pho;
    } else {
      double ham = hamming24(st.census0().at(p.x, p.y), st.census1().at(x1i, y1i));
      pho = std::min(ham, w.tau_pho);
    }
    // Mixture lookup clamps to the image so d1 is still rated near borders.
    int xc = std::clamp(x1i, 0, k.width - 1), yc = std::clamp(y1i, 0, k.height - 1);
    svd1 = mog_nll(st.prior1().at(xc, yc), 1.0 / x1.z());
  }
  return w.theta_pho * pho + w.theta_svd * (svd0 + svd1);
}

double pairwise_energy(const SceneState& st, const PlaneParam& nk, const PlaneParam& nl,
                       const std::vector<PixelCoord>& boundary, const TermWeights& w) {
  double depth_sum = 0.0;
  for (const PixelCoord& p : boundary) {
    const Vec3& ray = st.ray(p.x, p.y);
    depth_sum += std::min(std::abs(nk.n.dot(ray) - nl.n.dot(ray)), w.tau_depth);
  }
  double nk_norm = nk.n.norm(), nl_norm = nl.n.norm();
  double orient = w.tau_orient;
  if (nk_norm > 0.0 && nl_norm > 0.0)
    orient = std::min(1.0 - std::abs(nk.n.dot(nl.n)) / (nk_norm * nl_norm), w.tau_orient);
  return w.theta_depth * depth_sum + w.theta_orient * orient;
}

EnergyBreakdown total_energy_breakdown(const SceneState& st) {
  EnergyBreakdown e;
  const auto& sps = st.superpixels();
  for (size_t i = 0; i < sps.size(); ++i) {
    const Superpixel& sp = sps[i];
    const TermWeights& uw = st.unary_weights(sp);
    const RigidMotion& motion = st.bodies()[sp.body_id].motion;
    const PlaneParam& n = st.planes()[i];
    double acc = 0.0;
    for (const PixelCoord& p : sp.pixels) acc += unary_energy(st, p, n, motion, uw);
    e.unary += acc;
    for (const auto& [nb_id, boundary] : sp.neighbors) {
      if (nb_id <= sp.id) continue;  // each edge once, k < l
      const Superpixel& nb = sps[nb_id];
      e.pairwise +=
          pairwise_energy(st, n, st.planes()[nb_id], boundary, st.pairwise_weights(sp, nb));
    }
  }
  return e;
}

double total_energy(const SceneState& st) { return total_energy_breakdown(st).total(); }

double local_plane_energy(const SceneState& st, int sp_index, const PlaneParam& candidate) {
  const Superpixel& sp = st.superpixels()[sp_index];
  const TermWeights& uw = st.unary_weights(sp);
  const RigidMotion& motion = st.bodies()[sp.body_id].motion;
  double acc = 0.0;
  for (const PixelCoord& p : sp.pixels) acc += unary_energy(st, p, candidate, motion, uw);
  for (const auto& [nb_id, boundary] : sp.neighbors) {
    const Superpixel& nb = st.superpixels()[nb_id];
    acc += pairwise_energy(st, candidate, st.planes()[nb_id], boundary,
                           st.pairwise_weights(sp, nb));
  }
  return acc;
}

SceneFlowField extract_sceneflow(const SceneState& st) {
  const CameraIntrinsics& k = st.intrinsics();
  SceneFlowField field(k.width, k.height);
  const auto& sps = st.superpixels();
  for (size_t i = 0; i < sps.size(); ++i) {
    const Superpixel& sp = sps[i];
    const PlaneParam& n = st.planes()[i];
    const RigidMotion& t = st.bodies()[sp.body_id].motion;
    for (const PixelCoord& p : sp.pixels) {
      size_t idx = field.index(p.x, p.y);
      const Vec3& ray = st.ray(p.x, p.y);
      double d0 = n.n.dot(ray);
      field.d0[idx] = d0;
      if (!(d0 > 0.0)) continue;
      Vec3 x1 = t.rotation * (ray / d0) + t.translation;
      if (!(x1.z() > 0.0)) continue;
      field.d1[idx] = 1.0 / x1.z();
      field.flow_u[idx] = (k.fx * x1.x() / x1.z() + k.cx) - double(p.x);
      field.flow_v[idx] = (k.fy * x1.y() / x1.z() + k.cy) - double(p.y);
      field.valid[idx] = 1;
    }
  }
  return field;
}

}  // namespace monosf
