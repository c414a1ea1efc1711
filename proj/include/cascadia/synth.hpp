#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cascadia/influence.hpp"
#include "cascadia/ingest.hpp"
#include "cascadia/urlclass.hpp"

namespace cascadia {

struct PlantSpec {
  UrlClass cls = UrlClass::Benign;
  std::string category;  // blacklist category for Light/Critical plants
  LifeStage stage = LifeStage::RapidGrowth;
  std::int64_t count = 0;
};

struct SynthConfig {
  std::int64_t n_threads = 100;
  double base_rate = 1.0;         // comments per minute at time zero
  double decay = 30.0;            // base-rate e-folding time, minutes
  double excitation = 0.05;       // intensity bump per prior comment
  double excitation_decay = 5.0;  // bump e-folding time, minutes
  double reaction_rate = 0.3;     // reactions per minute, 10 min per comment
  std::int64_t horizon = 240;     // minutes of simulated discussion
  std::vector<PlantSpec> plants;
  // Intensity multipliers applied for ir_delta_t after a planted comment:
  // first boosts Increase plants, second suppresses Decrease plants.
  std::optional<std::pair<double, double>> ir_regimes;
  std::int64_t ir_delta_t_seconds = 60;
  std::uint64_t seed = 1;
};

struct PlantTruth {
  std::string comment_id;
  UrlLabel label;
  IrDirection direction = IrDirection::Decrease;
  LifeStage stage = LifeStage::RapidGrowth;
};

struct ThreadTruth {
  std::string post_id;
  bool target = false;  // any Light or Critical plant
  std::vector<PlantTruth> plants;
};

struct SynthGroundTruth {
  std::vector<ThreadTruth> threads;
};

// Self-exciting comment arrivals (thinning over an exponentially decaying
// base rate plus per-event excitation), planted URL comments at ranks inside
// the requested stage band, optional post-plant boost/suppress regimes, and
// reaction tails per comment. Deterministic for a given seed regardless of
// worker count. Plants designate Increase for RapidGrowth and Decrease
// otherwise, so placement correlates with the realized direction.
std::pair<std::vector<PostThread>, SynthGroundTruth> generate(
    const SynthConfig& config, int workers = 1);

// Writes the line-delimited ingest format; inverse of parse_thread_file.
void emit(const std::vector<PostThread>& threads, const std::string& path);

// Flat "key = value" lines plus repeated "plant = class,category,stage,count"
// lines; '#' starts a comment.
SynthConfig parse_synth_config_text(const std::string& text);
SynthConfig parse_synth_config(const std::string& path);

// CSV: post_id,comment_id,class,category,stage,direction (one row per plant).
void write_ground_truth(const SynthGroundTruth& truth, const std::string& path);

// Small deterministic lists the generator's URLs are built against.
std::vector<std::string> fixture_whitelist();
BlacklistIndex fixture_blacklist();

// Materializes the fixtures for CLI runs: <dir>/whitelist.txt and
// <dir>/blacklist/<category>/domains.
void write_fixture_lists(const std::string& dir);

}  // namespace cascadia
