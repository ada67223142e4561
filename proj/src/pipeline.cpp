#include "monosf/pipeline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "monosf/error.hpp"
#include "monosf/recalib.hpp"
#include "monosf/synth.hpp"

namespace monosf {

namespace fs = std::filesystem;

namespace {

TermWeights term_weights_from(const KeyValueFile& kv, const std::string& prefix,
                              const TermWeights& base) {
  TermWeights w = base;
  w.theta_pho = kv.get_double(prefix + ".theta0", w.theta_pho);
  w.theta_svd = kv.get_double(prefix + ".theta1", w.theta_svd);
  w.theta_depth = kv.get_double(prefix + ".theta2", w.theta_depth);
  w.theta_orient = kv.get_double(prefix + ".theta3", w.theta_orient);
  w.tau_pho = kv.get_double(prefix + ".tau0", w.tau_pho);
  w.tau_depth = kv.get_double(prefix + ".tau1", w.tau_depth);
  w.tau_orient = kv.get_double(prefix + ".tau2", w.tau_orient);
  return w;
}

}  // namespace

RunConfig RunConfig::from_kv(KeyValueFile& kv) {
  RunConfig cfg;

  if (kv.has("intrinsics_from")) {
    KeyValueFile manifest = KeyValueFile::parse_file(kv.get_string("intrinsics_from"));
    cfg.fx = manifest.get_double("fx");
    cfg.fy = manifest.get_double("fy");
    cfg.cx = manifest.get_double("cx");
    cfg.cy = manifest.get_double("cy");
  }
  cfg.fx = kv.get_double("fx", cfg.fx);
  cfg.fy = kv.get_double("fy", cfg.fy);
  cfg.cx = kv.get_double("cx", cfg.cx);
  cfg.cy = kv.get_double("cy", cfg.cy);

  cfg.weights.background = term_weights_from(kv, "bg", cfg.weights.background);
  cfg.weights.object = term_weights_from(kv, "obj", cfg.weights.object);
  cfg.weights.cross = term_weights_from(kv, "cross", cfg.weights.cross);

  cfg.inference.iterations = kv.get_int("inference.iterations", cfg.inference.iterations);
  cfg.inference.motion_particles =
      kv.get_int("inference.motion_particles", cfg.inference.motion_particles);
  cfg.inference.normal_particles =
      kv.get_int("inference.normal_particles", cfg.inference.normal_particles);
  cfg.inference.normal_sigma = kv.get_double("inference.normal_sigma", cfg.inference.normal_sigma);
  cfg.inference.rot_sigma = kv.get_double("inference.rot_sigma", cfg.inference.rot_sigma);
  cfg.inference.trans_sigma = kv.get_double("inference.trans_sigma", cfg.inference.trans_sigma);
  cfg.inference.decay = kv.get_double("inference.decay", cfg.inference.decay);
  cfg.inference.sweeps = kv.get_int("inference.sweeps", cfg.inference.sweeps);
  cfg.inference.seed = kv.get_u64("seed", cfg.inference.seed);
  cfg.inference.threads = kv.get_int("threads", cfg.inference.threads);

  cfg.init.theta_reproj = kv.get_double("init.theta4", cfg.init.theta_reproj);
  cfg.init.huber_width_px = kv.get_double("init.huber_px", cfg.init.huber_width_px);
  cfg.init.lm_max_iterations = kv.get_int("init.lm_max_iterations", cfg.init.lm_max_iterations);
  cfg.init.lm_initial_lambda = kv.get_double("init.lm_initial_lambda", cfg.init.lm_initial_lambda);
  cfg.init.lm_max_lambda = kv.get_double("init.lm_max_lambda", cfg.init.lm_max_lambda);
  cfg.init.lm_cost_tolerance = kv.get_double("init.lm_cost_tolerance", cfg.init.lm_cost_tolerance);
  cfg.init.lm_gradient_tolerance =
      kv.get_double("init.lm_gradient_tolerance", cfg.init.lm_gradient_tolerance);
  cfg.init.vote_threshold = kv.get_int("init.vote_threshold", cfg.init.vote_threshold);
  cfg.init.min_matches = kv.get_int("init.min_matches", cfg.init.min_matches);
  cfg.init.superpixel_count = kv.get_int("init.superpixels", cfg.init.superpixel_count);
  cfg.init.match_grid_step = kv.get_int("init.match_grid", cfg.init.match_grid_step);
  cfg.init.match_search_radius = kv.get_int("init.match_radius", cfg.init.match_search_radius);

  cfg.eval_baseline_m = kv.get_double("eval.baseline", cfg.eval_baseline_m);
  cfg.eval_abs_px = kv.get_double("eval.abs_px", cfg.eval_abs_px);
  cfg.eval_rel = kv.get_double("eval.rel", cfg.eval_rel);
  cfg.eval_mre_cap_m = kv.get_double("eval.mre_cap", cfg.eval_mre_cap_m);
  cfg.eval_keep_disocc = kv.get_bool("eval.keep_disocc", cfg.eval_keep_disocc);

  cfg.image0 = kv.get_string("image0", cfg.image0);
  cfg.image1 = kv.get_string("image1", cfg.image1);
  cfg.priors0 = kv.get_string("priors0", cfg.priors0);
  cfg.priors1 = kv.get_string("priors1", cfg.priors1);
  cfg.masks0 = kv.get_string("masks0", cfg.masks0);
  cfg.masks1 = kv.get_string("masks1", cfg.masks1);
  cfg.matches = kv.get_string("matches", cfg.matches);
  cfg.recalib = kv.get_string("recalib", cfg.recalib);
  cfg.out_dir = kv.get_string("out", cfg.out_dir);

  cfg.no_pho = kv.get_bool("no_pho", cfg.no_pho);
  cfg.no_svd = kv.get_bool("no_svd", cfg.no_svd);
  cfg.no_smooth = kv.get_bool("no_smooth", cfg.no_smooth);
  cfg.no_prob_depth = kv.get_bool("no_prob_depth", cfg.no_prob_depth);
  cfg.no_recalib = kv.get_bool("no_recalib", cfg.no_recalib);
  cfg.min_calib_samples = size_t(kv.get_int("min_calib_samples", int(cfg.min_calib_samples)));

  kv.require_all_consumed();
  return cfg;
}

RunConfig RunConfig::from_file(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  KeyValueFile kv = path.empty() ? KeyValueFile::parse_text("", "<defaults>")
                                 : KeyValueFile::parse_file(path);
  for (const auto& [key, value] : overrides) kv.set(key, value);
  return from_kv(kv);
}

DepthDistMap collapse_to_global_sigma(const DepthDistMap& map) {
  double var_sum = 0.0;
  size_t n = size_t(map.width()) * map.height();
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x) var_sum += mog_variance(map.at(x, y));
  double sigma = std::sqrt(std::max(var_sum / double(n), 1e-12));
  DepthDistMap out(map.width(), map.height(), 1);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      out.set(x, y, GaussianMixture1D::single(mog_mean(map.at(x, y)), sigma));
  return out;
}

void run_synth(const std::string& synth_config_path, const std::string& out_dir) {
  SynthConfig cfg = parse_synth_config(synth_config_path);
  SynthFixture fx = render_pair(cfg);
  SynthPriors priors = make_priors(fx.gt, fx.frame1_inv_depth, cfg.noise, cfg.seed,
                                   cfg.calib_stride);
  write_fixture(out_dir, cfg, fx, priors);
}

EstimateOutputs run_estimate(const RunConfig& cfg) {
  for (const auto& [name, path] : std::initializer_list<std::pair<const char*, std::string>>{
           {"image0", cfg.image0},
           {"image1", cfg.image1},
           {"priors0", cfg.priors0},
           {"priors1", cfg.priors1},
           {"masks0", cfg.masks0},
           {"masks1", cfg.masks1}})
    if (path.empty()) throw ConfigError(std::string("estimate: missing input path '") + name + "'");
  if (cfg.out_dir.empty()) throw ConfigError("estimate: missing output directory ('out')");

  GrayImage image0 = load_pgm8(cfg.image0);
  GrayImage image1 = load_pgm8(cfg.image1);
  LabelImage masks0 = load_pgm16(cfg.masks0);
  LabelImage masks1 = load_pgm16(cfg.masks1);
  DepthDistMap prior0 = DepthDistMap::load(cfg.priors0);
  DepthDistMap prior1 = DepthDistMap::load(cfg.priors1);

  if (image0.width != image1.width || image0.height != image1.height ||
      masks0.width != image0.width || masks0.height != image0.height ||
      masks1.width != image0.width || masks1.height != image0.height ||
      prior0.width() != image0.width || prior0.height() != image0.height ||
      prior1.width() != image0.width || prior1.height() != image0.height)
    throw ConfigError("estimate: input sizes disagree");

  CameraIntrinsics k;
  k.width = image0.width;
  k.height = image0.height;
  k.fx = cfg.fx;
  k.fy = cfg.fy;
  k.cx = cfg.cx >= 0 ? cfg.cx : 0.5 * (image0.width - 1);
  k.cy = cfg.cy >= 0 ? cfg.cy : 0.5 * (image0.height - 1);
  if (!k.valid())
    throw ConfigError("estimate: invalid or missing intrinsics (fx, fy, cx, cy)");

  if (!cfg.recalib.empty() && !cfg.no_recalib) {
    RecalibMap map = RecalibMap::load(cfg.recalib);
    prior0 = apply_recalibration(map, prior0);
    prior1 = apply_recalibration(map, prior1);
  }
  if (cfg.no_prob_depth) {
    prior0 = collapse_to_global_sigma(prior0);
    prior1 = collapse_to_global_sigma(prior1);
  }

  EnergyWeights weights = cfg.weights;
  for (TermWeights* w : {&weights.background, &weights.object, &weights.cross}) {
    if (cfg.no_pho) w->theta_pho = 0;
    if (cfg.no_svd) w->theta_svd = 0;
    if (cfg.no_smooth) {
      w->theta_depth = 0;
      w->theta_orient = 0;
    }
  }

  CensusMap census0 = census_transform(image0);
  CensusMap census1 = census_transform(image1);

  std::vector<SparseMatch> matches =
      cfg.matches.empty()
          ? census_block_match(census0, census1, cfg.init.match_grid_step,
                               cfg.init.match_search_radius)
          : load_matches(cfg.matches);

  // Bodies: pair instances, estimate the background, then each object.
  BodyInit bodies = pair_instances(masks0, masks1, matches, cfg.init);
  RigidMotion bg_motion =
      init_background_motion(bodies.body_matches[0], prior0, prior1, k, cfg.init);
  bodies.bodies[0].motion = bg_motion;
  for (size_t b = 1; b < bodies.bodies.size(); ++b) {
    if (int(bodies.body_matches[b].size()) >= cfg.init.min_matches) {
      bodies.bodies[b].motion =
          estimate_body_motion(bodies.body_matches[b], prior0, prior1, k, cfg.init, bg_motion)
              .motion;
    } else {
      bodies.bodies[b].motion = bg_motion;
    }
  }

  Superpixelization segmentation =
      superpixelize(image0, masks0, cfg.init.superpixel_count);
  for (size_t s = 0; s < segmentation.superpixels.size(); ++s) {
    uint16_t label = segmentation.instance_labels[s];
    segmentation.superpixels[s].body_id =
        label < bodies.body_of_instance.size() ? bodies.body_of_instance[label] : 0;
  }
  std::vector<PlaneParam> planes = init_planes(segmentation.superpixels, prior0, k);

  SceneState state(k, std::move(census0), std::move(census1), std::move(prior0),
                   std::move(prior1), std::move(segmentation.superpixels), std::move(planes),
                   bodies.bodies, weights);
  OptimizeResult opt = optimize(state, cfg.inference);

  EstimateOutputs out;
  out.field = extract_sceneflow(state);
  out.trace = opt.trace;
  out.bodies = state.bodies();

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("estimate: cannot create output directory " + cfg.out_dir);
  auto p = [&](const char* name) { return (fs::path(cfg.out_dir) / name).string(); };
  int w = out.field.width, h = out.field.height;
  auto to_img = [&](const std::vector<double>& v) {
    FloatImage img(w, h);
    for (size_t i = 0; i < v.size(); ++i) img.values[i] = float(v[i]);
    return img;
  };
  save_pfm(p("d0.pfm"), to_img(out.field.d0));
  save_pfm(p("d1.pfm"), to_img(out.field.d1));
  save_pfm(p("flow_u.pfm"), to_img(out.field.flow_u));
  save_pfm(p("flow_v.pfm"), to_img(out.field.flow_v));
  FloatImage valid(w, h);
  for (size_t i = 0; i < out.field.valid.size(); ++i) valid.values[i] = float(out.field.valid[i]);
  save_pfm(p("valid.pfm"), valid);
  save_energy_trace(p("trace.csv"), out.trace);
  return out;
}

CalibrateOutputs run_calibrate(const std::string& samples_path, const std::string& out_map_path,
                               const std::string& curve_csv_path,
                               const std::vector<double>& levels, size_t min_samples) {
  std::vector<CalibSample> samples = load_calib_samples(samples_path);
  FitOptions opts;
  opts.min_samples = min_samples;
  RecalibMap map = fit_recalibration(samples, opts);
  CalibrateOutputs out;
  out.nll_before = mean_nll(samples);
  out.nll_after = mean_nll(samples, map);
  if (!out_map_path.empty()) map.save(out_map_path);
  if (!curve_csv_path.empty()) {
    auto before = calibration_curve(samples, levels);
    auto after = calibration_curve(samples, levels, map);
    std::ofstream csv(curve_csv_path);
    if (!csv) throw IoError("cannot write calibration curve: " + curve_csv_path);
    csv.precision(10);
    csv << "level,frequency,frequency_recalibrated\n";
    for (size_t i = 0; i < levels.size(); ++i)
      csv << levels[i] << "," << before[i].second << "," << after[i].second << "\n";
  }
  return out;
}

MetricsReport run_eval(const std::string& est_dir, const std::string& gt_dir,
                       const RunConfig& cfg, const std::string& out_csv_path) {
  auto est = [&](const char* name) { return (fs::path(est_dir) / name).string(); };
  auto gt = [&](const char* name) { return (fs::path(gt_dir) / name).string(); };

  FloatImage est_d0 = load_pfm(est("d0.pfm"));
  FloatImage est_d1 = load_pfm(est("d1.pfm"));
  FloatImage est_u = load_pfm(est("flow_u.pfm"));
  FloatImage est_v = load_pfm(est("flow_v.pfm"));
  FloatImage gt_d0 = load_pfm(gt("gt_d0.pfm"));
  FloatImage gt_d1 = load_pfm(gt("gt_d1.pfm"));
  FloatImage gt_u = load_pfm(gt("gt_flow_u.pfm"));
  FloatImage gt_v = load_pfm(gt("gt_flow_v.pfm"));
  FloatImage gt_valid = load_pfm(gt("gt_valid.pfm"));
  LabelImage instances = load_pgm16(gt("masks0.pgm"));

  if (cfg.fx <= 0) throw ConfigError("eval: fx required to form disparities");
  EvalConfig ec;
  ec.baseline_times_fx = cfg.eval_baseline_m * cfg.fx;
  ec.abs_threshold_px = cfg.eval_abs_px;
  ec.rel_threshold = cfg.eval_rel;
  ec.mre_depth_cap_m = cfg.eval_mre_cap_m;

  std::vector<uint8_t> valid(gt_valid.values.size());
  for (size_t i = 0; i < valid.size(); ++i) valid[i] = gt_valid.values[i] > 0.5f ? 1 : 0;
  std::string photo_path = gt("gt_photo_valid.pfm");
  if (!cfg.eval_keep_disocc && fs::exists(photo_path)) {
    FloatImage photo = load_pfm(photo_path);
    for (size_t i = 0; i < valid.size(); ++i)
      if (!(photo.values[i] > 0.5f)) valid[i] = 0;
  }

  MetricsReport report;
  report.d1 = disparity_error_rate(est_d0, gt_d0, valid, instances, ec);
  report.d2 = disparity_error_rate(est_d1, gt_d1, valid, instances, ec);
  report.fl = flow_error_rate(est_u, est_v, gt_u, gt_v, valid, instances, ec);
  report.sf = sceneflow_error_rate(est_d0, est_d1, est_u, est_v, gt_d0, gt_d1, gt_u, gt_v,
                                   valid, instances, ec);
  report.mre = mean_relative_error(est_d0, gt_d0, valid, instances, ec);

  if (!out_csv_path.empty()) {
    std::ofstream csv(out_csv_path);
    if (!csv) throw IoError("cannot write metrics CSV: " + out_csv_path);
    csv << report.to_csv();
  }
  return report;
}

}  // namespace monosf
