// monosf command line: synth | estimate | calibrate | eval. The tool goes
// through the shared-library C API only.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "monosf/monosf_c.h"

namespace {

const char* category(monosf_status st) {
  switch (st) {
    case MONOSF_ERROR_CONFIG:
      return "config";
    case MONOSF_ERROR_IO:
      return "io";
    case MONOSF_ERROR_SOLVER:
      return "solver";
    default:
      return "invalid";
  }
}

int fail(monosf_status st) {
  std::fprintf(stderr, "error: %s: %s\n", category(st), monosf_last_error());
  return static_cast<int>(st);
}

struct ConfigHandle {
  monosf_config* ptr = nullptr;
  ~ConfigHandle() { monosf_config_destroy(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular scene flow from piecewise-planar rigid-body optimization"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  std::string synth_config, synth_out;
  CLI::App* synth = app.add_subcommand("synth", "Render a synthetic fixture set");
  synth->add_option("config", synth_config, "synth key=value config file")->required();
  synth->add_option("out_dir", synth_out, "output fixture directory")->required();

  // estimate ----------------------------------------------------------------
  std::string est_config;
  std::vector<std::string> est_sets;
  std::string image0, image1, priors0, priors1, masks0, masks1, matches, recalib, out_dir;
  uint64_t seed = 0;
  int threads = 0, iterations = 0;
  bool no_pho = false, no_svd = false, no_smooth = false, no_prob_depth = false,
       no_recalib = false;
  CLI::App* est = app.add_subcommand("estimate", "Estimate scene flow for an image pair");
  est->add_option("--config", est_config, "key=value run configuration");
  est->add_option("--image0", image0, "frame-0 image (8-bit PGM)");
  est->add_option("--image1", image1, "frame-1 image (8-bit PGM)");
  est->add_option("--priors0", priors0, "frame-0 depth priors (MOGD)");
  est->add_option("--priors1", priors1, "frame-1 depth priors (MOGD)");
  est->add_option("--masks0", masks0, "frame-0 instance masks (16-bit PGM)");
  est->add_option("--masks1", masks1, "frame-1 instance masks (16-bit PGM)");
  est->add_option("--matches", matches, "sparse matches text file (built-in matcher if absent)");
  est->add_option("--recalib", recalib, "recalibration map to apply to the priors");
  est->add_option("--out", out_dir, "output directory");
  est->add_option("--seed", seed, "random seed");
  est->add_option("--threads", threads, "worker thread cap");
  est->add_option("--iterations", iterations, "belief-propagation iterations");
  est->add_flag("--no-pho", no_pho, "zero the photometric weight");
  est->add_flag("--no-svd", no_svd, "zero the single-view depth weight");
  est->add_flag("--no-smooth", no_smooth, "zero the smoothness weights");
  est->add_flag("--no-prob-depth", no_prob_depth,
                "collapse priors to a global fixed-sigma Gaussian at their means");
  est->add_flag("--no-recalib", no_recalib, "skip applying the recalibration map");
  est->add_option("--set", est_sets, "extra key=value override (repeatable)");

  // calibrate ---------------------------------------------------------------
  std::string samples_path, map_out, curve_out;
  CLI::App* cal = app.add_subcommand("calibrate", "Fit a recalibration map to MOGC samples");
  cal->add_option("samples", samples_path, "calibration samples (MOGC)")->required();
  cal->add_option("out_map", map_out, "output recalibration map")->required();
  cal->add_option("--curve", curve_out, "also write a calibration-curve CSV");

  // eval ---------------------------------------------------------------------
  std::string eval_est, eval_gt, eval_config, eval_csv;
  std::vector<std::string> eval_sets;
  CLI::App* ev = app.add_subcommand("eval", "Score an estimate against ground truth");
  ev->add_option("est_dir", eval_est, "estimate directory")->required();
  ev->add_option("gt_dir", eval_gt, "ground-truth directory")->required();
  ev->add_option("--config", eval_config, "key=value run configuration");
  ev->add_option("--out", eval_csv, "metrics CSV output path");
  ev->add_option("--set", eval_sets, "extra key=value override (repeatable)");

  CLI11_PARSE(app, argc, argv);

  auto apply_sets = [](monosf_config* cfg, const std::vector<std::string>& sets) {
    for (const std::string& kvpair : sets) {
      auto eq = kvpair.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: config: --set needs key=value, got '%s'\n",
                     kvpair.c_str());
        return false;
      }
      monosf_config_set(cfg, kvpair.substr(0, eq).c_str(), kvpair.substr(eq + 1).c_str());
    }
    return true;
  };

  if (synth->parsed()) {
    monosf_status st = monosf_synth(synth_config.c_str(), synth_out.c_str());
    return st == MONOSF_OK ? 0 : fail(st);
  }

  if (est->parsed()) {
    ConfigHandle cfg;
    cfg.ptr = monosf_config_create(est_config.empty() ? nullptr : est_config.c_str());
    if (!cfg.ptr) return fail(MONOSF_ERROR_CONFIG);
    auto set_if = [&](const char* key, const std::string& value) {
      if (!value.empty()) monosf_config_set(cfg.ptr, key, value.c_str());
    };
    set_if("image0", image0);
    set_if("image1", image1);
    set_if("priors0", priors0);
    set_if("priors1", priors1);
    set_if("masks0", masks0);
    set_if("masks1", masks1);
    set_if("matches", matches);
    set_if("recalib", recalib);
    set_if("out", out_dir);
    if (est->count("--seed")) monosf_config_set(cfg.ptr, "seed", std::to_string(seed).c_str());
    if (threads > 0) monosf_config_set(cfg.ptr, "threads", std::to_string(threads).c_str());
    if (iterations > 0)
      monosf_config_set(cfg.ptr, "inference.iterations", std::to_string(iterations).c_str());
    if (no_pho) monosf_config_set(cfg.ptr, "no_pho", "1");
    if (no_svd) monosf_config_set(cfg.ptr, "no_svd", "1");
    if (no_smooth) monosf_config_set(cfg.ptr, "no_smooth", "1");
    if (no_prob_depth) monosf_config_set(cfg.ptr, "no_prob_depth", "1");
    if (no_recalib) monosf_config_set(cfg.ptr, "no_recalib", "1");
    if (!apply_sets(cfg.ptr, est_sets)) return 2;
    monosf_status st = monosf_estimate(cfg.ptr);
    return st == MONOSF_OK ? 0 : fail(st);
  }

  if (cal->parsed()) {
    monosf_status st = monosf_calibrate(samples_path.c_str(), map_out.c_str(),
                                        curve_out.empty() ? nullptr : curve_out.c_str());
    return st == MONOSF_OK ? 0 : fail(st);
  }

  if (ev->parsed()) {
    ConfigHandle cfg;
    cfg.ptr = monosf_config_create(eval_config.empty() ? nullptr : eval_config.c_str());
    if (!cfg.ptr) return fail(MONOSF_ERROR_CONFIG);
    if (!apply_sets(cfg.ptr, eval_sets)) return 2;
    monosf_status st = monosf_eval(eval_est.c_str(), eval_gt.c_str(), cfg.ptr,
                                   eval_csv.empty() ? nullptr : eval_csv.c_str());
    return st == MONOSF_OK ? 0 : fail(st);
  }
  return 0;
}
