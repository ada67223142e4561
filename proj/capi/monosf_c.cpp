#include "monosf/monosf_c.h"

#include <string>
#include <utility>
#include <vector>

#include "monosf/error.hpp"
#include "monosf/pipeline.hpp"

using namespace monosf;

// The handle keeps the raw key/value pairs; RunConfig validation happens at
// use time so set() can never leave a handle half-updated.
struct monosf_config {
  std::string path;
  std::vector<std::pair<std::string, std::string>> overrides;

  RunConfig build() const { return RunConfig::from_file(path, overrides); }
};

namespace {

thread_local std::string g_last_error;

monosf_status capture(const std::exception& e) {
  g_last_error = e.what();
  if (const Error* err = dynamic_cast<const Error*>(&e))
    return static_cast<monosf_status>(static_cast<int>(err->kind()));
  return MONOSF_ERROR;
}

template <typename Fn>
monosf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MONOSF_OK;
  } catch (const std::exception& e) {
    return capture(e);
  } catch (...) {
    g_last_error = "unknown error";
    return MONOSF_ERROR;
  }
}

}  // namespace

extern "C" {

int monosf_version(void) { return 1; }

const char* monosf_last_error(void) { return g_last_error.c_str(); }

monosf_config* monosf_config_create(const char* path) {
  monosf_config* cfg = new (std::nothrow) monosf_config;
  if (!cfg) {
    g_last_error = "out of memory";
    return nullptr;
  }
  cfg->path = path ? path : "";
  if (!cfg->path.empty()) {
    // Validate eagerly so a bad path fails here, not at first use.
    monosf_status st = guarded([&] { cfg->build(); });
    if (st != MONOSF_OK) {
      delete cfg;
      return nullptr;
    }
  }
  return cfg;
}

void monosf_config_destroy(monosf_config* cfg) { delete cfg; }

monosf_status monosf_config_set(monosf_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "monosf_config_set: null argument";
    return MONOSF_ERROR;
  }
  cfg->overrides.emplace_back(key, value);
  g_last_error.clear();
  return MONOSF_OK;
}

monosf_status monosf_synth(const char* synth_config_path, const char* out_dir) {
  if (!synth_config_path || !out_dir) {
    g_last_error = "monosf_synth: null argument";
    return MONOSF_ERROR;
  }
  return guarded([&] { run_synth(synth_config_path, out_dir); });
}

monosf_status monosf_estimate(const monosf_config* cfg) {
  if (!cfg) {
    g_last_error = "monosf_estimate: null configuration";
    return MONOSF_ERROR;
  }
  return guarded([&] { run_estimate(cfg->build()); });
}

monosf_status monosf_calibrate(const char* samples_path, const char* out_map_path,
                               const char* curve_csv_path) {
  if (!samples_path || !out_map_path) {
    g_last_error = "monosf_calibrate: null argument";
    return MONOSF_ERROR;
  }
  return guarded([&] {
    std::vector<double> levels;
    for (int i = 1; i <= 9; ++i) levels.push_back(i / 10.0);
    run_calibrate(samples_path, out_map_path, curve_csv_path ? curve_csv_path : "", levels,
                  100);
  });
}

monosf_status monosf_eval(const char* est_dir, const char* gt_dir, const monosf_config* cfg,
                          const char* out_csv_path) {
  if (!est_dir || !gt_dir || !cfg) {
    g_last_error = "monosf_eval: null argument";
    return MONOSF_ERROR;
  }
  return guarded(
      [&] { run_eval(est_dir, gt_dir, cfg->build(), out_csv_path ? out_csv_path : ""); });
}

}  // extern "C"
