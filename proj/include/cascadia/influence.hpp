#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascadia/ingest.hpp"
#include "cascadia/urlclass.hpp"

namespace cascadia {

enum class IrDirection { Increase, Decrease };
enum class LifeStage { RapidGrowth, SlowDecay, Dormancy };

const char* direction_name(IrDirection d);
const char* stage_name(LifeStage s);
std::optional<IrDirection> direction_from_name(const std::string& name);
std::optional<LifeStage> stage_from_name(const std::string& name);

struct IrSample {
  std::string post_id;
  std::string comment_id;
  double ir = 0.0;  // -infinity when the upcoming window is empty
  IrDirection label = IrDirection::Decrease;
  LifeStage stage = LifeStage::RapidGrowth;
  double position_ratio = 0.0;
  std::optional<std::int64_t> elapsed_since_prev_seconds;  // absent on first
};

struct Piv {
  std::int64_t delta_t_seconds = 60;
  std::vector<std::int64_t> components;  // [i-1] = bucket i counting backwards
};

// ln(up / prev) where up counts activities in [t, t+dt) minus the comment
// itself and prev counts [t-dt, t) plus the comment; -infinity when up = 0.
double influence_ratio(const PostThread& thread, const std::string& comment_id,
                       std::int64_t delta_t_seconds);

// components[i-1] = activity count in [t - i*dt, t - (i-1)*dt).
Piv compute_piv(const PostThread& thread, const std::string& comment_id,
                std::int64_t delta_t_seconds, std::int64_t k);

IrDirection ir_label(double ir);  // Increase iff ir > 0

// RapidGrowth below 0.50, SlowDecay in [0.50, 0.85), Dormancy from 0.85.
LifeStage life_stage(double position_ratio);

struct IrRecord {
  Piv piv;
  IrSample sample;
  UrlLabel label;
};

// One record per comment or reply carrying at least one non-whitelisted URL,
// ordered by post_id then comment rank. Rank and position_ratio are over the
// thread's text-bearing activities in time order.
std::vector<IrRecord> extract_ir_dataset(
    const std::vector<PostThread>& threads,
    const std::vector<std::string>& whitelist, const BlacklistIndex& blacklist,
    std::int64_t delta_t_seconds, std::int64_t k, int threads_n = 1);

std::string ir_csv_string(const std::vector<IrRecord>& records);
void write_ir_csv(const std::string& path,
                  const std::vector<IrRecord>& records);
std::vector<IrRecord> read_ir_csv(const std::string& path,
                                  std::int64_t delta_t_seconds = 60);

struct StageCdfRow {
  std::string label_class;
  double position_ratio = 0.0;
  double cumulative_fraction = 0.0;
};

// Per-class empirical CDF of comment position ratios.
std::vector<StageCdfRow> stage_cdf(const std::vector<IrRecord>& records);

}  // namespace cascadia
