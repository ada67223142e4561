#include "monosf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "monosf/config.hpp"
#include "monosf/error.hpp"
#include "monosf/rng.hpp"

namespace monosf {

namespace {

bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool inside = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    bool crosses = (poly[i].y() > y) != (poly[j].y() > y);
    if (crosses) {
      double xt = poly[j].x() +
                  (y - poly[j].y()) / (poly[i].y() - poly[j].y()) * (poly[i].x() - poly[j].x());
      if (x < xt) inside = !inside;
    }
  }
  return inside;
}

// Last region (painter's order) containing the point, or -1.
int region_at(const std::vector<SynthRegion>& regions, double x, double y) {
  for (int r = int(regions.size()) - 1; r >= 0; --r)
    if (point_in_polygon(regions[r].polygon, x, y)) return r;
  return -1;
}

// Deterministic lattice value in [0,1) for band-limited value noise.
double lattice_value(uint64_t seed, uint64_t octave, int64_t i, int64_t j) {
  Rng r = Rng::derive(seed, octave * 0x51ed2701 + uint64_t(i) * 2654435761u,
                      uint64_t(j) * 40503u + 7);
  return r.uniform();
}

double value_noise(uint64_t seed, int octaves, double x, double y) {
  double acc = 0.0, total_amp = 0.0;
  double spacing = 16.0, amp = 1.0;
  for (int o = 0; o < octaves; ++o) {
    double gx = x / spacing, gy = y / spacing;
    int64_t ix = int64_t(std::floor(gx)), iy = int64_t(std::floor(gy));
    double fx = gx - double(ix), fy = gy - double(iy);
    double v00 = lattice_value(seed, o, ix, iy);
    double v10 = lattice_value(seed, o, ix + 1, iy);
    double v01 = lattice_value(seed, o, ix, iy + 1);
    double v11 = lattice_value(seed, o, ix + 1, iy + 1);
    double v = v00 * (1 - fx) * (1 - fy) + v10 * fx * (1 - fy) + v01 * (1 - fx) * fy +
               v11 * fx * fy;
    acc += amp * v;
    total_amp += amp;
    spacing *= 0.5;
    amp *= 0.6;
  }
  return acc / total_amp;
}

uint8_t shade(double v, double contrast) {
  double g = 127.5 + (v - 0.5) * 255.0 * 2.2 * contrast;
  return uint8_t(std::clamp(g, 0.0, 255.0));
}

double bilinear(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, double(img.width - 1));
  y = std::clamp(y, 0.0, double(img.height - 1));
  int x0 = int(x), y0 = int(y);
  int x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
  double fx = x - x0, fy = y - y0;
  return img.at(x0, y0) * (1 - fx) * (1 - fy) + img.at(x1, y0) * fx * (1 - fy) +
         img.at(x0, y1) * (1 - fx) * fy + img.at(x1, y1) * fx * fy;
}

// Plane of a moved region expressed in the t=1 camera frame; n1.dot(X1) == 1.
Vec3 moved_plane(const PlaneParam& n, const RigidMotion& t, const std::string& name) {
  Vec3 rn = t.rotation * n.n;
  double denom = 1.0 + rn.dot(t.translation);
  if (std::abs(denom) < 1e-12)
    throw ConfigError("synth: region '" + name + "' plane passes through the t=1 camera center");
  return rn / denom;
}

}  // namespace

SynthFixture render_pair(const SynthConfig& cfg) {
  const CameraIntrinsics& k = cfg.intrinsics;
  if (!k.valid()) throw ConfigError("synth: invalid intrinsics");
  if (cfg.regions.empty()) throw ConfigError("synth: no regions");
  if (cfg.bodies.empty()) throw ConfigError("synth: no bodies");
  int n_background = 0;
  for (const RigidBody& b : cfg.bodies)
    if (b.kind == BodyKind::Background) ++n_background;
  if (n_background != 1) throw ConfigError("synth: exactly one background body required");
  for (const SynthRegion& r : cfg.regions) {
    if (r.polygon.size() < 3)
      throw ConfigError("synth: region '" + r.name + "' needs at least 3 polygon points");
    if (r.body < 0 || r.body >= int(cfg.bodies.size()))
      throw ConfigError("synth: region '" + r.name + "' references missing body");
  }

  int w = k.width, h = k.height;
  Mat3 ki = k.inverse_matrix();
  SynthFixture fx;
  fx.image0 = GrayImage(w, h);
  fx.image1 = GrayImage(w, h);
  fx.masks0 = LabelImage(w, h);
  fx.masks1 = LabelImage(w, h);
  fx.gt = SceneFlowField(w, h);
  fx.frame1_inv_depth.assign(size_t(w) * h, 0.0);
  fx.disocc1.assign(size_t(w) * h, 0);
  fx.photo_consistent0.assign(size_t(w) * h, 0);
  fx.region_of_pixel.assign(size_t(w) * h, -1);

  // Instance labels: objects numbered 1.. in body order.
  std::vector<uint16_t> label_of_body(cfg.bodies.size(), 0);
  uint16_t next_label = 1;
  for (size_t b = 0; b < cfg.bodies.size(); ++b)
    if (cfg.bodies[b].kind == BodyKind::Object) label_of_body[b] = next_label++;

  std::vector<Vec3> moved(cfg.regions.size());
  std::vector<RigidMotion> inv_motion(cfg.regions.size());
  for (size_t r = 0; r < cfg.regions.size(); ++r) {
    const SynthRegion& reg = cfg.regions[r];
    const RigidMotion& motion = cfg.bodies[reg.body].motion;
    moved[r] = moved_plane(reg.plane, motion, reg.name);
    inv_motion[r] = motion.inverse();
  }

  // Back-warps frame-1 point q through region r; false when the source is
  // behind either camera.
  auto source_of = [&](int r, double qx, double qy, double* sx, double* sy) {
    Vec3 ray1 = ki * Vec3(qx, qy, 1.0);
    double d1 = moved[r].dot(ray1);
    if (!(d1 > 0.0)) return false;
    Vec3 x0 = inv_motion[r].apply(ray1 / d1);
    if (!(x0.z() > 0.0)) return false;
    *sx = k.fx * x0.x() / x0.z() + k.cx;
    *sy = k.fy * x0.y() / x0.z() + k.cy;
    return true;
  };

  // Frame-0 labeling, GT maps and visibility.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int r = region_at(cfg.regions, x, y);
      if (r < 0)
        throw ConfigError("synth: pixel (" + std::to_string(x) + "," + std::to_string(y) +
                          ") is covered by no region");
      size_t idx = size_t(y) * w + x;
      fx.region_of_pixel[idx] = r;
      const SynthRegion& reg = cfg.regions[r];
      fx.masks0.labels[idx] = label_of_body[reg.body];

      Vec3 ray = ki * Vec3(x, y, 1.0);
      double d0 = reg.plane.n.dot(ray);
      if (!(d0 > 0.0))
        throw ConfigError("synth: region '" + reg.name + "' has non-positive depth at t=0");
      Vec3 x1 = cfg.bodies[reg.body].motion.apply(ray / d0);
      if (!(x1.z() > 0.0))
        throw ConfigError("synth: region '" + reg.name + "' has non-positive depth at t=1");
      double u1 = k.fx * x1.x() / x1.z() + k.cx;
      double v1 = k.fy * x1.y() / x1.z() + k.cy;
      fx.gt.d0[idx] = d0;
      fx.gt.d1[idx] = 1.0 / x1.z();
      fx.gt.flow_u[idx] = u1 - x;
      fx.gt.flow_v[idx] = v1 - y;
      fx.gt.valid[idx] = 1;
    }
  }

  // Frame-0 texture.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      size_t idx = size_t(y) * w + x;
      // Per-region salt so surfaces differ in appearance.
      uint64_t salt = cfg.seed * 1315423911u + uint64_t(fx.region_of_pixel[idx]) * 2654435761u;
      fx.image0.pixels[idx] = shade(value_noise(salt, cfg.texture.octaves, x, y),
                                    cfg.texture.contrast);
    }

  // Frame 1 by inverse warping with a nearest-surface test. A region is a
  // valid source for frame-1 pixel q when the back-warped point lies inside
  // the region's own footprint (painter's order included).
  auto winner_at = [&](double qx, double qy) -> int {
    int best = -1;
    double best_d1 = 0.0;
    for (size_t r = 0; r < cfg.regions.size(); ++r) {
      double sx, sy;
      if (!source_of(int(r), qx, qy, &sx, &sy)) continue;
      if (region_at(cfg.regions, sx, sy) != int(r)) continue;
      double d1 = moved[r].dot(ki * Vec3(qx, qy, 1.0));
      if (d1 > best_d1) {
        best_d1 = d1;
        best = int(r);
      }
    }
    return best;
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t idx = size_t(y) * w + x;
      int r = winner_at(x, y);
      if (r < 0) {
        // Disoccluded: fresh texture, background label.
        uint64_t salt = cfg.seed * 0x9e3779b9u + 0xd150cc;
        fx.image1.pixels[idx] =
            shade(value_noise(salt, cfg.texture.octaves, x, y), cfg.texture.contrast);
        fx.disocc1[idx] = 1;
        // Depth of the re-exposed surface: farthest eligible plane ignoring
        // footprints, so the prior map stays defined everywhere.
        double d1_bg = 0.0;
        for (size_t rr = 0; rr < cfg.regions.size(); ++rr) {
          double d1 = moved[rr].dot(ki * Vec3(x, y, 1.0));
          if (d1 > 0.0 && (d1_bg == 0.0 || d1 < d1_bg)) d1_bg = d1;
        }
        fx.frame1_inv_depth[idx] = d1_bg;
        continue;
      }
      double sx = 0, sy = 0;
      source_of(r, x, y, &sx, &sy);
      fx.image1.pixels[idx] = uint8_t(std::lround(bilinear(fx.image0, sx, sy)));
      fx.masks1.labels[idx] = label_of_body[cfg.regions[r].body];
      fx.frame1_inv_depth[idx] = moved[r].dot(ki * Vec3(x, y, 1.0));
    }
  }

  // Frame-0 pixels observable in frame 1: target in bounds and the winning
  // surface there is this pixel's region.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t idx = size_t(y) * w + x;
      double u1 = x + fx.gt.flow_u[idx], v1 = y + fx.gt.flow_v[idx];
      if (u1 < 0 || v1 < 0 || u1 > w - 1 || v1 > h - 1) continue;
      if (winner_at(u1, v1) == fx.region_of_pixel[idx]) fx.photo_consistent0[idx] = 1;
    }
  }

  // Exact matches on a grid over observable pixels.
  int step = std::max(1, cfg.match_grid_step);
  for (int y = step / 2; y < h; y += step) {
    for (int x = step / 2; x < w; x += step) {
      size_t idx = size_t(y) * w + x;
      if (!fx.photo_consistent0[idx]) continue;
      fx.matches.push_back({{double(x), double(y)},
                            {x + fx.gt.flow_u[idx], y + fx.gt.flow_v[idx]}});
    }
  }
  return fx;
}

namespace {

// Builds one mixture such that d_gt is an exact draw from it (component
// picked by weight, then a Gaussian draw), then applies the stored-sigma
// miscalibration and optional outlier component.
GaussianMixture1D make_mixture_for(double d_gt, const PriorNoiseModel& noise, Rng& rng) {
  int k = std::max(1, noise.components);
  double sigma_base = std::max(noise.mu_rel_std * std::abs(d_gt), noise.sigma_floor);

  std::vector<double> offsets(k), scales(k), weights(k);
  offsets[0] = 0.0;
  scales[0] = 1.0;
  weights[0] = k == 1 ? 1.0 : 0.75;
  double rest = 1.0 - weights[0];
  double raw_sum = 0.0;
  std::vector<double> raw(k, 0.0);
  for (int i = 1; i < k; ++i) {
    offsets[i] = rng.normal(0.0, 2.0);
    scales[i] = rng.uniform(1.5, 3.0);
    raw[i] = rng.uniform(0.5, 1.5);
    raw_sum += raw[i];
  }
  for (int i = 1; i < k; ++i) weights[i] = rest * raw[i] / raw_sum;

  // Component that generates d_gt, chosen by weight.
  double u = rng.uniform();
  int gen = 0;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += weights[i];
    if (u < acc) {
      gen = i;
      break;
    }
  }
  double g = rng.normal();
  double anchor = d_gt - offsets[gen] * sigma_base - scales[gen] * sigma_base * g;

  std::vector<double> means(k), log_stds(k);
  for (int i = 0; i < k; ++i) {
    means[i] = anchor + offsets[i] * sigma_base;
    log_stds[i] = std::log(scales[i] * sigma_base * noise.miscalibration);
  }

  if (k > 1 && noise.outlier_prob > 0.0 && rng.uniform() < noise.outlier_prob) {
    // Replace the last component by a wrong-depth mode with solid weight.
    double w_out = 0.15;
    double scale_back = (1.0 - w_out) / (1.0 - weights[k - 1]);
    for (int i = 0; i + 1 < k; ++i) weights[i] *= scale_back;
    weights[k - 1] = w_out;
    means[k - 1] = d_gt * rng.uniform(1.4, 2.0);
    log_stds[k - 1] = std::log(4.0 * sigma_base * noise.miscalibration);
  }

  GaussianMixture1D m(std::move(weights), std::move(means), std::move(log_stds));
  m.normalize_weights();
  return m;
}

}  // namespace

SynthPriors make_priors(const SceneFlowField& gt, const std::vector<double>& frame1_inv_depth,
                        const PriorNoiseModel& noise, uint64_t seed, int calib_stride) {
  int w = gt.width, h = gt.height;
  if (frame1_inv_depth.size() != size_t(w) * h)
    throw InvalidArgument("make_priors: frame-1 depth size mismatch");
  int k = std::max(1, noise.components);
  SynthPriors out{DepthDistMap(w, h, k), DepthDistMap(w, h, k), {}};
  int stride = std::max(1, calib_stride);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t idx = size_t(y) * w + x;
      Rng rng0 = Rng::derive(seed, idx, 11);
      GaussianMixture1D m0 = make_mixture_for(gt.d0[idx], noise, rng0);
      out.prior0.set(x, y, m0);
      Rng rng1 = Rng::derive(seed, idx, 23);
      double d1 = frame1_inv_depth[idx] > 0 ? frame1_inv_depth[idx] : gt.d0[idx];
      out.prior1.set(x, y, make_mixture_for(d1, noise, rng1));
      if (x % stride == 0 && y % stride == 0) out.samples.push_back({m0, gt.d0[idx]});
    }
  }
  return out;
}

std::vector<CalibSample> make_calib_samples(size_t n, const PriorNoiseModel& noise,
                                            uint64_t seed) {
  std::vector<CalibSample> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Rng rng = Rng::derive(seed, i, 37);
    double d_gt = rng.uniform(0.04, 0.25);
    out.push_back({make_mixture_for(d_gt, noise, rng), d_gt});
  }
  return out;
}

SynthConfig parse_synth_config(const std::string& path) {
  KeyValueFile kv = KeyValueFile::parse_file(path);
  SynthConfig cfg;
  cfg.intrinsics.width = kv.get_int("width");
  cfg.intrinsics.height = kv.get_int("height");
  cfg.intrinsics.fx = kv.get_double("fx");
  cfg.intrinsics.fy = kv.get_double("fy");
  cfg.intrinsics.cx = kv.get_double("cx");
  cfg.intrinsics.cy = kv.get_double("cy");
  cfg.seed = kv.get_u64("seed", 1);
  cfg.texture.octaves = kv.get_int("texture.octaves", cfg.texture.octaves);
  cfg.texture.contrast = kv.get_double("texture.contrast", cfg.texture.contrast);
  cfg.noise.mu_rel_std = kv.get_double("noise.mu_rel", cfg.noise.mu_rel_std);
  cfg.noise.sigma_floor = kv.get_double("noise.sigma_floor", cfg.noise.sigma_floor);
  cfg.noise.miscalibration = kv.get_double("noise.miscalib", cfg.noise.miscalibration);
  cfg.noise.outlier_prob = kv.get_double("noise.outlier_prob", cfg.noise.outlier_prob);
  cfg.noise.components = kv.get_int("noise.components", cfg.noise.components);
  cfg.match_grid_step = kv.get_int("match_grid", cfg.match_grid_step);
  cfg.calib_stride = kv.get_int("calib_stride", cfg.calib_stride);

  for (int b = 0;; ++b) {
    std::string prefix = "body." + std::to_string(b) + ".";
    if (!kv.has(prefix + "kind")) break;
    RigidBody body;
    body.id = b;
    std::string kind = kv.get_string(prefix + "kind");
    if (kind == "background") body.kind = BodyKind::Background;
    else if (kind == "object") body.kind = BodyKind::Object;
    else throw ConfigError("synth config: body kind must be background|object, got " + kind);
    body.motion.rotation = rotation_from_axis_angle(kv.get_vec3(prefix + "axis_angle"));
    body.motion.translation = kv.get_vec3(prefix + "translation");
    cfg.bodies.push_back(body);
  }

  for (int r = 0;; ++r) {
    std::string prefix = "region." + std::to_string(r) + ".";
    if (!kv.has(prefix + "n")) break;
    SynthRegion reg;
    reg.name = std::to_string(r);
    reg.plane.n = kv.get_vec3(prefix + "n");
    reg.body = kv.get_int(prefix + "body", 0);
    if (kv.has(prefix + "rect")) {
      std::vector<double> v = kv.get_doubles(prefix + "rect");
      if (v.size() != 4) throw ConfigError("synth config: rect needs x0,y0,x1,y1");
      reg.polygon = {{v[0], v[1]}, {v[2], v[1]}, {v[2], v[3]}, {v[0], v[3]}};
    } else {
      std::string poly = kv.get_string(prefix + "poly");
      std::stringstream ss(poly);
      std::string pt;
      while (std::getline(ss, pt, ';')) {
        std::vector<double> v = parse_double_list(pt, "polygon point");
        if (v.size() != 2) throw ConfigError("synth config: polygon point needs x,y");
        reg.polygon.emplace_back(v[0], v[1]);
      }
    }
    cfg.regions.push_back(reg);
  }

  kv.require_all_consumed();
  return cfg;
}

void write_fixture(const std::string& dir, const SynthConfig& cfg, const SynthFixture& fx,
                   const SynthPriors& priors) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create fixture directory: " + dir);
  auto p = [&](const char* name) { return (fs::path(dir) / name).string(); };

  save_pgm8(p("image0.pgm"), fx.image0);
  save_pgm8(p("image1.pgm"), fx.image1);
  save_pgm16(p("masks0.pgm"), fx.masks0);
  save_pgm16(p("masks1.pgm"), fx.masks1);
  priors.prior0.save(p("priors0.mogd"));
  priors.prior1.save(p("priors1.mogd"));
  save_calib_samples(p("calib.mogc"), priors.samples);
  save_matches(p("matches.txt"), fx.matches);

  int w = fx.gt.width, h = fx.gt.height;
  auto to_img = [&](const std::vector<double>& v) {
    FloatImage img(w, h);
    for (size_t i = 0; i < v.size(); ++i) img.values[i] = float(v[i]);
    return img;
  };
  save_pfm(p("gt_d0.pfm"), to_img(fx.gt.d0));
  save_pfm(p("gt_d1.pfm"), to_img(fx.gt.d1));
  save_pfm(p("gt_flow_u.pfm"), to_img(fx.gt.flow_u));
  save_pfm(p("gt_flow_v.pfm"), to_img(fx.gt.flow_v));
  FloatImage valid(w, h), photo(w, h);
  for (size_t i = 0; i < fx.gt.valid.size(); ++i) {
    valid.values[i] = float(fx.gt.valid[i]);
    photo.values[i] = float(fx.photo_consistent0[i]);
  }
  save_pfm(p("gt_valid.pfm"), valid);
  save_pfm(p("gt_photo_valid.pfm"), photo);

  std::ofstream manifest(p("manifest.txt"));
  if (!manifest) throw IoError("cannot write fixture manifest in " + dir);
  manifest.precision(17);
  manifest << "width=" << cfg.intrinsics.width << "\nheight=" << cfg.intrinsics.height
           << "\nfx=" << cfg.intrinsics.fx << "\nfy=" << cfg.intrinsics.fy
           << "\ncx=" << cfg.intrinsics.cx << "\ncy=" << cfg.intrinsics.cy
           << "\nseed=" << cfg.seed << "\ntexture.octaves=" << cfg.texture.octaves
           << "\ntexture.contrast=" << cfg.texture.contrast
           << "\nnoise.mu_rel=" << cfg.noise.mu_rel_std
           << "\nnoise.sigma_floor=" << cfg.noise.sigma_floor
           << "\nnoise.miscalib=" << cfg.noise.miscalibration
           << "\nnoise.outlier_prob=" << cfg.noise.outlier_prob
           << "\nnoise.components=" << cfg.noise.components
           << "\nmatch_grid=" << cfg.match_grid_step
           << "\ncalib_stride=" << cfg.calib_stride << "\n";
  for (size_t b = 0; b < cfg.bodies.size(); ++b) {
    const RigidBody& body = cfg.bodies[b];
    Vec3 aa = axis_angle_from_rotation(body.motion.rotation);
    manifest << "body." << b << ".kind="
             << (body.kind == BodyKind::Background ? "background" : "object") << "\n";
    manifest << "body." << b << ".axis_angle=" << aa.x() << "," << aa.y() << "," << aa.z()
             << "\n";
    manifest << "body." << b << ".translation=" << body.motion.translation.x() << ","
             << body.motion.translation.y() << "," << body.motion.translation.z() << "\n";
  }
  for (size_t r = 0; r < cfg.regions.size(); ++r) {
    const SynthRegion& reg = cfg.regions[r];
    manifest << "region." << r << ".n=" << reg.plane.n.x() << "," << reg.plane.n.y() << ","
             << reg.plane.n.z() << "\n";
    manifest << "region." << r << ".body=" << reg.body << "\n";
    manifest << "region." << r << ".poly=";
    for (size_t i = 0; i < reg.polygon.size(); ++i)
      manifest << (i ? ";" : "") << reg.polygon[i].x() << "," << reg.polygon[i].y();
    manifest << "\n";
  }
}

SceneState make_gt_scene_state(const SynthConfig& cfg, const SynthFixture& fx,
                               const DepthDistMap& prior0, const DepthDistMap& prior1,
                               const EnergyWeights& weights) {
  int w = fx.gt.width, h = fx.gt.height;
  std::vector<Superpixel> sps(cfg.regions.size());
  std::vector<PlaneParam> planes(cfg.regions.size());
  for (size_t r = 0; r < cfg.regions.size(); ++r) {
    sps[r].id = int(r);
    sps[r].body_id = cfg.regions[r].body;
    planes[r] = cfg.regions[r].plane;
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      sps[fx.region_of_pixel[size_t(y) * w + x]].pixels.push_back({x, y});

  // Boundary sets from 4-connectivity, symmetric by construction.
  std::vector<std::vector<std::vector<PixelCoord>>> bounds(
      sps.size(), std::vector<std::vector<PixelCoord>>(sps.size()));
  auto reg = [&](int x, int y) { return fx.region_of_pixel[size_t(y) * w + x]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int r = reg(x, y);
      if (x + 1 < w && reg(x + 1, y) != r) {
        bounds[r][reg(x + 1, y)].push_back({x, y});
        bounds[reg(x + 1, y)][r].push_back({x + 1, y});
      }
      if (y + 1 < h && reg(x, y + 1) != r) {
        bounds[r][reg(x, y + 1)].push_back({x, y});
        bounds[reg(x, y + 1)][r].push_back({x, y + 1});
      }
    }
  for (size_t a = 0; a < sps.size(); ++a)
    for (size_t b = 0; b < sps.size(); ++b)
      if (a != b && !bounds[a][b].empty()) {
        std::vector<PixelCoord> merged = bounds[a][b];
        for (const PixelCoord& p : bounds[b][a]) merged.push_back(p);
        std::sort(merged.begin(), merged.end(),
                  [](const PixelCoord& l, const PixelCoord& r) {
                    return l.y != r.y ? l.y < r.y : l.x < r.x;
                  });
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        if (a < b) {
          sps[a].neighbors.emplace_back(int(b), merged);
          sps[b].neighbors.emplace_back(int(a), merged);
        }
      }
  for (Superpixel& sp : sps)
    std::sort(sp.neighbors.begin(), sp.neighbors.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });

  return SceneState(cfg.intrinsics, census_transform(fx.image0), census_transform(fx.image1),
                    prior0, prior1, std::move(sps), std::move(planes), cfg.bodies, weights);
}

}  // namespace monosf
