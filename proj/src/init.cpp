#include "monosf/init.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "monosf/error.hpp"

namespace monosf {

std::vector<SparseMatch> load_matches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matches file: " + path);
  std::vector<SparseMatch> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double x0, y0, x1, y1;
    if (!(ss >> x0)) continue;  // blank line
    if (!(ss >> y0 >> x1 >> y1))
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 'x0 y0 x1 y1'");
    out.push_back({{x0, y0}, {x1, y1}});
  }
  return out;
}

void save_matches(const std::string& path, const std::vector<SparseMatch>& matches) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write matches file: " + path);
  out.precision(17);
  for (const SparseMatch& m : matches)
    out << m.p0.u << " " << m.p0.v << " " << m.p1.u << " " << m.p1.v << "\n";
}

namespace {

int label_at(const LabelImage& masks, const Pixel& p) {
  int x = std::clamp(int(std::lround(p.u)), 0, masks.width - 1);
  int y = std::clamp(int(std::lround(p.v)), 0, masks.height - 1);
  return masks.at(x, y);
}

}  // namespace

BodyInit pair_instances(const LabelImage& masks0, const LabelImage& masks1,
                        const std::vector<SparseMatch>& matches, const InitConfig& cfg) {
  int n0 = masks0.max_label(), n1 = masks1.max_label();
  std::vector<std::vector<int>> votes(n0 + 1, std::vector<int>(n1 + 1, 0));
  for (const SparseMatch& m : matches) {
    int i = label_at(masks0, m.p0);
    if (i > 0) votes[i][label_at(masks1, m.p1)] += 1;
  }

  BodyInit out;
  out.bodies.push_back({0, BodyKind::Background, RigidMotion::identity()});
  out.body_of_instance.assign(n0 + 1, 0);
  out.linked_instance1.assign(1, 0);  // background links to label 0
  for (int i = 1; i <= n0; ++i) {
    int body_id = int(out.bodies.size());
    out.bodies.push_back({body_id, BodyKind::Object, RigidMotion::identity()});
    out.body_of_instance[i] = body_id;
    int best_j = 0, best_votes = 0;
    for (int j = 1; j <= n1; ++j) {
      if (votes[i][j] > best_votes) {
        best_votes = votes[i][j];
        best_j = j;
      }
    }
    out.linked_instance1.push_back(best_votes >= cfg.vote_threshold ? best_j : -1);
  }

  out.body_matches.assign(out.bodies.size(), {});
  for (const SparseMatch& m : matches) {
    int i = label_at(masks0, m.p0);
    int j = label_at(masks1, m.p1);
    int body = out.body_of_instance[i];
    int wanted = out.linked_instance1[body];
    if (wanted >= 0 && j == wanted) out.body_matches[body].push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Joint pose/point Levenberg-Marquardt
// ---------------------------------------------------------------------------

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

double huber(double s, double k) {
  return s <= k ? 0.5 * s * s : k * s - 0.5 * k * k;
}

double huber_weight(double s, double k) { return s <= k ? 1.0 : k / s; }

}  // namespace

MotionProblem::MotionProblem(const std::vector<SparseMatch>& matches,
                             const DepthDistMap& prior0, const DepthDistMap& prior1,
                             const CameraIntrinsics& k, const InitConfig& cfg)
    : matches_(matches), prior1_(&prior1), k_(k), cfg_(cfg) {
  Mat3 ki = k.inverse_matrix();
  rays0_.reserve(matches_.size());
  mix0_.reserve(matches_.size());
  for (const SparseMatch& m : matches_) {
    rays0_.push_back(ki * m.p0.homogeneous());
    int x = std::clamp(int(std::lround(m.p0.u)), 0, prior0.width() - 1);
    int y = std::clamp(int(std::lround(m.p0.v)), 0, prior0.height() - 1);
    mix0_.push_back(prior0.mixture(x, y));
  }
}

MotionProblem::State MotionProblem::make_initial(const RigidMotion& motion) const {
  State st;
  st.motion = motion;
  st.inv_depths.reserve(matches_.size());
  for (const GaussianMixture1D& m : mix0_)
    st.inv_depths.push_back(std::max(mog_mean(m), 1e-4));
  return st;
}

MotionProblem::State MotionProblem::retract(const State& st, const Eigen::VectorXd& delta) {
  State out = st;
  out.motion.rotation = st.motion.rotation * rotation_from_axis_angle(delta.segment<3>(0));
  out.motion.translation = st.motion.translation + delta.segment<3>(3);
  for (size_t i = 0; i < st.inv_depths.size(); ++i)
    out.inv_depths[i] = st.inv_depths[i] + delta[6 + i];
  return out;
}

std::optional<double> MotionProblem::cost(const State& st) const {
  double acc = 0.0;
  for (size_t i = 0; i < matches_.size(); ++i) {
    double d = st.inv_depths[i];
    if (!(d > 0.0)) return std::nullopt;
    Vec3 y = st.motion.apply(rays0_[i] / d);
    if (!(y.z() > 0.0)) return std::nullopt;
    double u = k_.fx * y.x() / y.z() + k_.cx;
    double v = k_.fy * y.y() / y.z() + k_.cy;
    double du = u - matches_[i].p1.u, dv = v - matches_[i].p1.v;
    acc += cfg_.theta_reproj * huber(std::hypot(du, dv), cfg_.huber_width_px);
    acc += mog_nll(mix0_[i], d);
    int qx = std::clamp(int(std::lround(u)), 0, prior1_->width() - 1);
    int qy = std::clamp(int(std::lround(v)), 0, prior1_->height() - 1);
    acc += mog_nll(prior1_->at(qx, qy), 1.0 / y.z());
  }
  return acc;
}

std::optional<MotionProblem::Terms> MotionProblem::eval_terms(const State& st,
                                                              int match_index) const {
  size_t i = size_t(match_index);
  double d = st.inv_depths[i];
  if (!(d > 0.0)) return std::nullopt;
  Vec3 x = rays0_[i] / d;
  Vec3 y = st.motion.apply(x);
  if (!(y.z() > 0.0)) return std::nullopt;

  int np = num_params();
  Terms t;
  t.grad_proj1 = Eigen::VectorXd::Zero(np);
  t.grad_svd0 = Eigen::VectorXd::Zero(np);
  t.grad_svd1 = Eigen::VectorXd::Zero(np);

  Mat3 jy_w = -st.motion.rotation * skew(x);
  Vec3 jy_d = -(st.motion.rotation * rays0_[i]) / (d * d);

  double iz = 1.0 / y.z();
  double u = k_.fx * y.x() * iz + k_.cx;
  double v = k_.fy * y.y() * iz + k_.cy;
  Eigen::Matrix<double, 2, 3> jpi;
  jpi << k_.fx * iz, 0, -k_.fx * y.x() * iz * iz, 0, k_.fy * iz, -k_.fy * y.y() * iz * iz;

  Vec2 e(u - matches_[i].p1.u, v - matches_[i].p1.v);
  double s = e.norm();
  t.proj1 = huber(s, cfg_.huber_width_px);
  if (s > 0.0) {
    double rho_prime = s <= cfg_.huber_width_px ? s : cfg_.huber_width_px;
    Eigen::RowVector2d dir = (rho_prime / s) * e.transpose();
    t.grad_proj1.segment<3>(0) = (dir * jpi * jy_w).transpose();
    t.grad_proj1.segment<3>(3) = (dir * jpi).transpose();
    t.grad_proj1[6 + match_index] = dir * jpi * jy_d;
  }

  double g0;
  t.svd0 = mog_nll_derivatives(mix0_[i].view(), d, &g0, nullptr);
  t.grad_svd0[6 + match_index] = g0;

  int qx = std::clamp(int(std::lround(u)), 0, prior1_->width() - 1);
  int qy = std::clamp(int(std::lround(v)), 0, prior1_->height() - 1);
  double g1;
  t.svd1 = mog_nll_derivatives(prior1_->at(qx, qy), iz, &g1, nullptr);
  // d(1/z)/d(params) = -1/z^2 * dY.z/d(params); lookup pixel treated frozen.
  double c = -g1 * iz * iz;
  t.grad_svd1.segment<3>(0) = c * jy_w.row(2).transpose();
  t.grad_svd1.segment<3>(3) = c * Vec3(0, 0, 1);
  t.grad_svd1[6 + match_index] = c * jy_d.z();
  return t;
}

MotionProblem::State MotionProblem::solve(const State& initial, double* initial_cost,
                                          double* final_cost) const {
  size_t n = matches_.size();
  State cur = initial;
  std::optional<double> f0 = cost(cur);
  if (!f0) throw SolverError("motion solver: invalid initial state");
  double f = *f0;
  if (initial_cost) *initial_cost = f;

  double lambda = cfg_.lm_initial_lambda;
  for (int iter = 0; iter < cfg_.lm_max_iterations; ++iter) {
    // Assemble the damped normal equations with the point block eliminated
    // by a Schur complement (the point Hessian is diagonal: one inverse
    // depth per match).
    Eigen::Matrix<double, 6, 6> a = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g_cam = Eigen::Matrix<double, 6, 1>::Zero();
    std::vector<Eigen::Matrix<double, 6, 1>> b(n, Eigen::Matrix<double, 6, 1>::Zero());
    std::vector<double> dd(n, 0.0), g_pt(n, 0.0);

    for (size_t i = 0; i < n; ++i) {
      double d = cur.inv_depths[i];
      Vec3 x = rays0_[i] / d;
      Vec3 y = cur.motion.apply(x);
      double iz = 1.0 / y.z();
      Mat3 jy_w = -cur.motion.rotation * skew(x);
      Vec3 jy_d = -(cur.motion.rotation * rays0_[i]) / (d * d);
      double u = k_.fx * y.x() * iz + k_.cx;
      double v = k_.fy * y.y() * iz + k_.cy;
      Eigen::Matrix<double, 2, 3> jpi;
      jpi << k_.fx * iz, 0, -k_.fx * y.x() * iz * iz, 0, k_.fy * iz, -k_.fy * y.y() * iz * iz;

      // Reprojection (IRLS Huber weight, fixed during the step).
      Vec2 e(u - matches_[i].p1.u, v - matches_[i].p1.v);
      double w = cfg_.theta_reproj * huber_weight(e.norm(), cfg_.huber_width_px);
      Eigen::Matrix<double, 2, 6> j_cam;
      j_cam.block<2, 3>(0, 0) = jpi * jy_w;
      j_cam.block<2, 3>(0, 3) = jpi;
      Vec2 j_d = jpi * jy_d;
      a += w * j_cam.transpose() * j_cam;
      b[i] += w * j_cam.transpose() * j_d;
      dd[i] += w * j_d.squaredNorm();
      g_cam += w * j_cam.transpose() * e;
      g_pt[i] += w * j_d.dot(e);

      // Single-view depth terms; negative curvature clamped to keep the
      // system positive semidefinite.
      double g0, h0;
      mog_nll_derivatives(mix0_[i].view(), d, &g0, &h0);
      g_pt[i] += g0;
      dd[i] += std::max(h0, 1e-8);

      int qx = std::clamp(int(std::lround(u)), 0, prior1_->width() - 1);
      int qy = std::clamp(int(std::lround(v)), 0, prior1_->height() - 1);
      double g1, h1;
      mog_nll_derivatives(prior1_->at(qx, qy), iz, &g1, &h1);
      double c = -iz * iz;  // d(1/z)/dY.z
      Eigen::Matrix<double, 6, 1> grad_z;
      grad_z.segment<3>(0) = jy_w.row(2).transpose();
      grad_z.segment<3>(3) = Vec3(0, 0, 1);
      double grad_z_d = jy_d.z();
      double h1c = std::max(h1, 1e-8);
      a += h1c * (c * c) * grad_z * grad_z.transpose();
      b[i] += h1c * (c * c) * grad_z * grad_z_d;
      dd[i] += h1c * (c * c) * grad_z_d * grad_z_d;
      g_cam += (g1 * c) * grad_z;
      g_pt[i] += g1 * c * grad_z_d;
    }

    double g_max = g_cam.cwiseAbs().maxCoeff();
    for (size_t i = 0; i < n; ++i) g_max = std::max(g_max, std::abs(g_pt[i]));
    if (g_max <= cfg_.lm_gradient_tolerance * (1.0 + std::abs(f))) break;

    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, 6, 6> a_aug = a;
      for (int r = 0; r < 6; ++r) a_aug(r, r) += lambda * std::max(a(r, r), 1e-12);
      Eigen::Matrix<double, 6, 6> schur = a_aug;
      Eigen::Matrix<double, 6, 1> rhs = -g_cam;
      std::vector<double> dd_aug(n);
      for (size_t i = 0; i < n; ++i) {
        dd_aug[i] = dd[i] * (1.0 + lambda) + 1e-12;
        schur -= b[i] * b[i].transpose() / dd_aug[i];
        rhs += b[i] * (g_pt[i] / dd_aug[i]);
      }
      Eigen::Matrix<double, 6, 1> delta_cam = schur.ldlt().solve(rhs);
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(num_params());
      delta.segment<6>(0) = delta_cam;
      for (size_t i = 0; i < n; ++i)
        delta[6 + i] = -(g_pt[i] + b[i].dot(delta_cam)) / dd_aug[i];

      State cand = retract(cur, delta);
      std::optional<double> fc = cost(cand);
      if (fc && *fc < f) {
        bool small_step = (f - *fc) <= cfg_.lm_cost_tolerance * std::max(1.0, std::abs(f));
        cur = cand;
        f = *fc;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        if (small_step) iter = cfg_.lm_max_iterations;  // converged
      } else {
        lambda *= 4.0;
        if (lambda > cfg_.lm_max_lambda) {
          // No descent direction left. Near stationarity this is
          // convergence; otherwise the problem is ill-posed.
          if (g_max <= 1e4 * cfg_.lm_gradient_tolerance * (1.0 + std::abs(f))) {
            iter = cfg_.lm_max_iterations;
            break;
          }
          throw SolverError("motion solver: damping range exhausted without descent");
        }
      }
    }
  }
  if (final_cost) *final_cost = f;
  return cur;
}

MotionEstimate estimate_body_motion(const std::vector<SparseMatch>& matches,
                                    const DepthDistMap& prior0, const DepthDistMap& prior1,
                                    const CameraIntrinsics& k, const InitConfig& cfg,
                                    const std::optional<RigidMotion>& initial) {
  if (int(matches.size()) < cfg.min_matches)
    throw InvalidArgument("estimate_body_motion: need at least " +
                          std::to_string(cfg.min_matches) + " matches, got " +
                          std::to_string(matches.size()));
  MotionProblem problem(matches, prior0, prior1, k, cfg);
  MotionEstimate est;
  MotionProblem::State st =
      problem.solve(problem.make_initial(initial.value_or(RigidMotion::identity())),
                    &est.initial_cost, &est.final_cost);
  est.motion = st.motion;
  Mat3 ki = k.inverse_matrix();
  for (size_t i = 0; i < matches.size(); ++i)
    est.points.push_back(ki * matches[i].p0.homogeneous() / st.inv_depths[i]);
  return est;
}

// ---------------------------------------------------------------------------
// Background initialization: normalized 8-point + prior-based scale
// ---------------------------------------------------------------------------

namespace {

// Depth of p0's point for motion (r, t): least-squares along the p0 ray from
// the epipolar constraint. Returns z at t=0 or 0 when degenerate.
double triangulate_z0(const Vec3& x0, const Vec3& x1, const Mat3& r, const Vec3& t) {
  Vec3 a = skew(x1) * (r * x0);
  Vec3 c = skew(x1) * t;
  double denom = a.dot(a);
  if (denom < 1e-18) return 0.0;
  return -a.dot(c) / denom;
}

RigidMotion decompose_essential(const Mat3& e, const std::vector<Vec3>& x0,
                                const std::vector<Vec3>& x1) {
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU(), v = svd.matrixV();
  if (u.determinant() < 0) u.col(2) *= -1;
  if (v.determinant() < 0) v.col(2) *= -1;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  Mat3 r1 = u * w * v.transpose();
  Mat3 r2 = u * w.transpose() * v.transpose();
  Vec3 t = u.col(2);

  RigidMotion best;
  int best_support = -1;
  for (const Mat3& r : {r1, r2}) {
    for (double sign : {1.0, -1.0}) {
      Vec3 ts = sign * t;
      int support = 0;
      for (size_t i = 0; i < x0.size(); ++i) {
        double z0 = triangulate_z0(x0[i], x1[i], r, ts);
        if (z0 <= 0) continue;
        if ((r * (x0[i] * z0) + ts).z() > 0) ++support;
      }
      if (support > best_support) {
        best_support = support;
        best.rotation = r;
        best.translation = ts;
      }
    }
  }
  return best;
}

}  // namespace

RigidMotion init_background_motion(const std::vector<SparseMatch>& bg_matches,
                                   const DepthDistMap& prior0, const DepthDistMap& prior1,
                                   const CameraIntrinsics& k, const InitConfig& cfg) {
  if (int(bg_matches.size()) < cfg.min_matches)
    throw InvalidArgument("init_background_motion: need at least " +
                          std::to_string(cfg.min_matches) + " matches");

  RigidMotion initial = RigidMotion::identity();
  std::vector<double> flow_mags;
  flow_mags.reserve(bg_matches.size());
  for (const SparseMatch& m : bg_matches)
    flow_mags.push_back(std::hypot(m.p1.u - m.p0.u, m.p1.v - m.p0.v));
  std::nth_element(flow_mags.begin(), flow_mags.begin() + flow_mags.size() / 2,
                   flow_mags.end());
  double median_flow = flow_mags[flow_mags.size() / 2];

  // The 8-point problem is degenerate for (near-)zero motion; start the LM
  // from the identity there.
  if (median_flow > 0.5 && bg_matches.size() >= 8) {
    Mat3 ki = k.inverse_matrix();
    std::vector<Vec3> x0, x1;
    x0.reserve(bg_matches.size());
    x1.reserve(bg_matches.size());
    for (const SparseMatch& m : bg_matches) {
      x0.push_back(ki * m.p0.homogeneous());
      x1.push_back(ki * m.p1.homogeneous());
    }
    Eigen::MatrixXd a(bg_matches.size(), 9);
    for (size_t i = 0; i < bg_matches.size(); ++i) {
      const Vec3& q0 = x0[i];
      const Vec3& q1 = x1[i];
      a.row(i) << q1.x() * q0.x(), q1.x() * q0.y(), q1.x(), q1.y() * q0.x(), q1.y() * q0.y(),
          q1.y(), q0.x(), q0.y(), 1.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    Eigen::Matrix<double, 9, 1> e_vec = svd.matrixV().col(8);
    Mat3 e_raw;
    e_raw << e_vec(0), e_vec(1), e_vec(2), e_vec(3), e_vec(4), e_vec(5), e_vec(6), e_vec(7),
        e_vec(8);
    Eigen::JacobiSVD<Mat3> esvd(e_raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 e = esvd.matrixU() * Vec3(1, 1, 0).asDiagonal() * esvd.matrixV().transpose();
    initial = decompose_essential(e, x0, x1);

    // Scale from the median ratio of prior depth to triangulated depth.
    std::vector<double> ratios;
    for (size_t i = 0; i < bg_matches.size(); ++i) {
      double z0 = triangulate_z0(x0[i], x1[i], initial.rotation, initial.translation);
      if (z0 <= 0) continue;
      int px = std::clamp(int(std::lround(bg_matches[i].p0.u)), 0, prior0.width() - 1);
      int py = std::clamp(int(std::lround(bg_matches[i].p0.v)), 0, prior0.height() - 1);
      double d_prior = mog_mean(prior0.at(px, py));
      if (d_prior <= 0) continue;
      ratios.push_back((1.0 / d_prior) / z0);
    }
    if (!ratios.empty()) {
      std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
      initial.translation *= ratios[ratios.size() / 2];
    }
  }

  return estimate_body_motion(bg_matches, prior0, prior1, k, cfg, initial).motion;
}

// ---------------------------------------------------------------------------
// Superpixelization
// ---------------------------------------------------------------------------

namespace {

struct Seed {
  double cx, cy;
  double mean_intensity;
  uint16_t label;
};

}  // namespace

Superpixelization superpixelize(const GrayImage& img, const LabelImage& masks,
                                int target_count) {
  if (target_count < 1) throw InvalidArgument("superpixelize: target_count must be >= 1");
  if (img.width != masks.width || img.height != masks.height)
    throw InvalidArgument("superpixelize: image/mask size mismatch");
  int w = img.width, h = img.height;

  int cols = std::max(1, int(std::lround(std::sqrt(double(target_count) * w / h))));
  int rows = std::max(1, (target_count + cols - 1) / cols);
  double sx = double(w) / cols, sy = double(h) / rows;
  double spacing = std::sqrt(double(w) * h / double(std::max(1, cols * rows)));

  std::vector<Seed> seeds;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double cx = (c + 0.5) * sx - 0.5, cy = (r + 0.5) * sy - 0.5;
      int ix = std::clamp(int(std::lround(cx)), 0, w - 1);
      int iy = std::clamp(int(std::lround(cy)), 0, h - 1);
      seeds.push_back({cx, cy, double(img.at(ix, iy)), masks.at(ix, iy)});
    }

  // Every connected mask component needs a seed of its own label, or its
  // pixels would be unassignable.
  {
    std::vector<int> comp(size_t(w) * h, -1);
    int n_comp = 0;
    std::vector<size_t> stack;
    for (size_t start = 0; start < comp.size(); ++start) {
      if (comp[start] >= 0) continue;
      int id = n_comp++;
      uint16_t label = masks.labels[start];
      stack.assign(1, start);
      comp[start] = id;
      while (!stack.empty()) {
        size_t p = stack.back();
        stack.pop_back();
        int x = int(p % w), y = int(p / w);
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k4 = 0; k4 < 4; ++k4) {
          int nx = x + dx[k4], ny = y + dy[k4];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          size_t q = size_t(ny) * w + nx;
          if (comp[q] < 0 && masks.labels[q] == label) {
            comp[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    std::vector<char> has_seed(n_comp, 0);
    for (const Seed& s : seeds) {
      int ix = std::clamp(int(std::lround(s.cx)), 0, w - 1);
      int iy = std::clamp(int(std::lround(s.cy)), 0, h - 1);
      has_seed[comp[size_t(iy) * w + ix]] = 1;
    }
    for (size_t p = 0; p < comp.size(); ++p) {
      if (!has_seed[comp[p]]) {
        has_seed[comp[p]] = 1;
        int x = int(p % w), y = int(p / w);
        seeds.push_back({double(x), double(y), double(img.at(x, y)), masks.labels[p]});
      }
    }
  }

  const double intensity_scale = 25.0;
  std::vector<int> assign(size_t(w) * h, -1);
  for (int round = 0; round < 3; ++round) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        uint16_t label = masks.at(x, y);
        double intensity = img.at(x, y);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t s = 0; s < seeds.size(); ++s) {
          if (seeds[s].label != label) continue;
          double dx = (x - seeds[s].cx) / spacing, dy = (y - seeds[s].cy) / spacing;
          double dsp = dx * dx + dy * dy;
          if (dsp > 8.0 && best >= 0) continue;  // outside the local window
          double di = (intensity - seeds[s].mean_intensity) / intensity_scale;
          double dist = dsp + di * di;
          if (dist < best_d - 1e-15) {
            best_d = dist;
            best = int(s);
          }
        }
        assign[size_t(y) * w + x] = best;
      }
    }
    // Recenter.
    std::vector<double> sum_x(seeds.size(), 0), sum_y(seeds.size(), 0),
        sum_i(seeds.size(), 0);
    std::vector<int> count(seeds.size(), 0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        int s = assign[size_t(y) * w + x];
        if (s < 0) continue;
        sum_x[s] += x;
        sum_y[s] += y;
        sum_i[s] += img.at(x, y);
        count[s] += 1;
      }
    for (size_t s = 0; s < seeds.size(); ++s) {
      if (count[s] == 0) continue;
      seeds[s].cx = sum_x[s] / count[s];
      seeds[s].cy = sum_y[s] / count[s];
      seeds[s].mean_intensity = sum_i[s] / count[s];
    }
  }

  // Connectivity: keep each seed's largest component, push the rest to the
  // lowest-id same-label neighbor (or spawn a new superpixel when isolated).
  std::vector<int> comp(size_t(w) * h, -1);
  std::vector<std::vector<size_t>> comp_pixels;
  std::vector<int> comp_seed;
  {
    std::vector<size_t> stack;
    for (size_t start = 0; start < comp.size(); ++start) {
      if (comp[start] >= 0) continue;
      int id = int(comp_pixels.size());
      comp_pixels.emplace_back();
      comp_seed.push_back(assign[start]);
      stack.assign(1, start);
      comp[start] = id;
      while (!stack.empty()) {
        size_t p = stack.back();
        stack.pop_back();
        comp_pixels[id].push_back(p);
        int x = int(p % w), y = int(p / w);
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k4 = 0; k4 < 4; ++k4) {
          int nx = x + dx[k4], ny = y + dy[k4];
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          size_t q = size_t(ny) * w + nx;
          if (comp[q] < 0 && assign[q] == assign[start]) {
            comp[q] = id;
            stack.push_back(q);
          }
        }
      }
      std::sort(comp_pixels[id].begin(), comp_pixels[id].end());
    }
  }
  std::vector<int> main_comp(seeds.size(), -1);
  for (size_t c = 0; c < comp_pixels.size(); ++c) {
    int s = comp_seed[c];
    if (s < 0) continue;
    if (main_comp[s] < 0 || comp_pixels[c].size() > comp_pixels[main_comp[s]].size())
      main_comp[s] = int(c);
  }
  for (size_t c = 0; c < comp_pixels.size(); ++c) {
    int s = comp_seed[c];
    if (s >= 0 && main_comp[s] == int(c)) continue;
    // Orphan component: merge into the lowest-id adjacent superpixel with
    // the same mask label.
    uint16_t label = masks.labels[comp_pixels[c].front()];
    int target = -1;
    for (size_t p : comp_pixels[c]) {
      int x = int(p % w), y = int(p / w);
      const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      for (int k4 = 0; k4 < 4; ++k4) {
        int nx = x + dx[k4], ny = y + dy[k4];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        size_t q = size_t(ny) * w + nx;
        if (comp[q] == int(c) || masks.labels[q] != label) continue;
        int qs = assign[q];
        if (qs >= 0 && comp[q] == main_comp[qs] && (target < 0 || qs < target)) target = qs;
      }
    }
    if (target < 0) {
      // Isolated island: becomes its own superpixel.
      size_t p0 = comp_pixels[c].front();
      seeds.push_back({double(p0 % w), double(p0 / w), double(img.pixels[p0]), label});
      target = int(seeds.size()) - 1;
      main_comp.push_back(int(c));
    }
    for (size_t p : comp_pixels[c]) assign[p] = target;
    if (main_comp[target] != int(c))
      for (size_t p : comp_pixels[c]) comp[p] = main_comp[target];
  }

  // Compact ids and build the output.
  std::vector<int> remap(seeds.size(), -1);
  std::vector<int> counts(seeds.size(), 0);
  for (int a : assign)
    if (a >= 0) counts[a] += 1;
  int next = 0;
  for (size_t s = 0; s < seeds.size(); ++s)
    if (counts[s] > 0) remap[s] = next++;

  Superpixelization out;
  out.superpixels.resize(next);
  out.instance_labels.resize(next);
  for (size_t s = 0; s < seeds.size(); ++s)
    if (remap[s] >= 0) {
      out.superpixels[remap[s]].id = remap[s];
      out.instance_labels[remap[s]] = seeds[s].label;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      out.superpixels[remap[assign[size_t(y) * w + x]]].pixels.push_back({x, y});

  // 4-connected adjacency and symmetric boundary sets.
  std::map<std::pair<int, int>, std::vector<PixelCoord>> boundaries;
  auto spid = [&](int x, int y) { return remap[assign[size_t(y) * w + x]]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int a = spid(x, y);
      if (x + 1 < w && spid(x + 1, y) != a) {
        int bsp = spid(x + 1, y);
        boundaries[{std::min(a, bsp), std::max(a, bsp)}].push_back({x, y});
        boundaries[{std::min(a, bsp), std::max(a, bsp)}].push_back({x + 1, y});
      }
      if (y + 1 < h && spid(x, y + 1) != a) {
        int bsp = spid(x, y + 1);
        boundaries[{std::min(a, bsp), std::max(a, bsp)}].push_back({x, y});
        boundaries[{std::min(a, bsp), std::max(a, bsp)}].push_back({x, y + 1});
      }
    }
  for (auto& [key, pixels] : boundaries) {
    std::sort(pixels.begin(), pixels.end(), [](const PixelCoord& l, const PixelCoord& r) {
      return l.y != r.y ? l.y < r.y : l.x < r.x;
    });
    pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
    out.superpixels[key.first].neighbors.emplace_back(key.second, pixels);
    out.superpixels[key.second].neighbors.emplace_back(key.first, pixels);
  }
  for (Superpixel& sp : out.superpixels)
    std::sort(sp.neighbors.begin(), sp.neighbors.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
  return out;
}

// ---------------------------------------------------------------------------
// Plane initialization
// ---------------------------------------------------------------------------

std::vector<PlaneParam> init_planes(const std::vector<Superpixel>& superpixels,
                                    const DepthDistMap& prior0, const CameraIntrinsics& k) {
  Mat3 ki = k.inverse_matrix();
  std::vector<PlaneParam> planes(superpixels.size());
  for (size_t s = 0; s < superpixels.size(); ++s) {
    const Superpixel& sp = superpixels[s];
    if (sp.pixels.size() < 3)
      throw InvalidArgument("init_planes: superpixel " + std::to_string(sp.id) +
                            " has fewer than 3 pixels");
    Mat3 a = Mat3::Zero();
    Vec3 rhs = Vec3::Zero();
    std::vector<std::pair<double, double>> weighted_depths;  // (d, w)
    weighted_depths.reserve(sp.pixels.size());
    Vec3 centroid_ray = Vec3::Zero();
    for (const PixelCoord& p : sp.pixels) {
      Vec3 ray = ki * Vec3(p.x, p.y, 1.0);
      MixtureView m = prior0.at(p.x, p.y);
      double d_hat = mog_mean(m);
      double w = 1.0 / std::max(mog_variance(m), 1e-12);
      a += w * ray * ray.transpose();
      rhs += w * ray * d_hat;
      weighted_depths.emplace_back(d_hat, w);
      centroid_ray += ray;
    }
    centroid_ray /= double(sp.pixels.size());

    Eigen::SelfAdjointEigenSolver<Mat3> eig(a);
    double cond = eig.eigenvalues()(2) / std::max(eig.eigenvalues()(0), 0.0);
    bool degenerate = !(eig.eigenvalues()(0) > 0) || cond > 1e8;
    if (!degenerate) {
      planes[s].n = a.ldlt().solve(rhs);
      if (planes[s].n.dot(centroid_ray) > 0 && planes[s].n.allFinite()) continue;
    }
    // Fallback: fronto-parallel plane at the weighted median inverse depth.
    std::sort(weighted_depths.begin(), weighted_depths.end());
    double total = 0;
    for (auto& [d, w] : weighted_depths) total += w;
    double acc = 0, median = weighted_depths.back().first;
    for (auto& [d, w] : weighted_depths) {
      acc += w;
      if (acc >= 0.5 * total) {
        median = d;
        break;
      }
    }
    planes[s].n = Vec3(0, 0, std::max(median, 1e-6));
  }
  return planes;
}

// ---------------------------------------------------------------------------
// Census block matcher (fallback when no matches file is supplied)
// ---------------------------------------------------------------------------

std::vector<SparseMatch> census_block_match(const CensusMap& census0, const CensusMap& census1,
                                            int grid_step, int search_radius) {
  std::vector<SparseMatch> out;
  int w = census0.width, h = census0.height;
  const int block = 2;  // +-2 descriptors, sampled every 2 px
  for (int y = grid_step / 2; y < h; y += grid_step) {
    for (int x = grid_step / 2; x < w; x += grid_step) {
      if (x < block * 2 || y < block * 2 || x >= w - block * 2 || y >= h - block * 2) continue;
      int best_cost = std::numeric_limits<int>::max();
      int best_dx = 0, best_dy = 0;
      for (int dy = -search_radius; dy <= search_radius; ++dy) {
        int ty = y + dy;
        if (ty < block * 2 || ty >= h - block * 2) continue;
        for (int dx = -search_radius; dx <= search_radius; ++dx) {
          int tx = x + dx;
          if (tx < block * 2 || tx >= w - block * 2) continue;
          int cost = 0;
          for (int oy = -block; oy <= block; ++oy)
            for (int ox = -block; ox <= block; ++ox)
              cost += hamming24(census0.at(x + ox * 2, y + oy * 2),
                                census1.at(tx + ox * 2, ty + oy * 2));
          if (cost < best_cost) {
            best_cost = cost;
            best_dx = dx;
            best_dy = dy;
          }
        }
      }
      // 25 descriptors in the block; demand a reasonably clean agreement.
      if (best_cost <= 4 * 25)
        out.push_back({{double(x), double(y)}, {double(x + best_dx), double(y + best_dy)}});
    }
  }
  return out;
}

}  // namespace monosf
