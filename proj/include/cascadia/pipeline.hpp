#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cascadia {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineParams {
  std::string corpus_path;
  std::string blacklist_dir;
  std::string whitelist_path;
  std::string out_dir = "reports";
  std::int64_t window_minutes = 5;
  std::int64_t horizon_minutes = 120;
  std::int64_t final_minutes = -1;  // kFinalAllMinutes: all comments seen
  std::int64_t resamples = 1000;
  double percentile = 50.0;
  std::int64_t delta_t_seconds = 60;
  std::int64_t piv_k = 60;
  std::int64_t n_estimators = 50;
  double learning_rate = 1.0;
  bool balance = false;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string command_line;  // recorded in the manifest
};

// Report files written into out_dir, in order: labels.csv, cascade_cv.csv,
// stats_compare.csv, ir_dataset.csv, learn_light.csv, learn_critical.csv,
// stage_cdf.csv, plus manifest.json (the manifest carries wall-clock
// timestamps, so it is the one file that differs between identical reruns).
// Everything is computed before anything is written; a stage failure
// surfaces as "stage <name>: <cause>" with no partial output left behind.
std::vector<std::string> run_pipeline(const PipelineParams& params);

}  // namespace cascadia
