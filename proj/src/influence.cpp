#include "cascadia/influence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

namespace cascadia {

const char* direction_name(IrDirection d) {
  return d == IrDirection::Increase ? "increase" : "decrease";
}

const char* stage_name(LifeStage s) {
  switch (s) {
    case LifeStage::RapidGrowth: return "rapid_growth";
    case LifeStage::SlowDecay: return "slow_decay";
    case LifeStage::Dormancy: return "dormancy";
  }
  return "rapid_growth";
}

std::optional<IrDirection> direction_from_name(const std::string& name) {
  if (name == "increase") return IrDirection::Increase;
  if (name == "decrease") return IrDirection::Decrease;
  return std::nullopt;
}

std::optional<LifeStage> stage_from_name(const std::string& name) {
  if (name == "rapid_growth") return LifeStage::RapidGrowth;
  if (name == "slow_decay") return LifeStage::SlowDecay;
  if (name == "dormancy") return LifeStage::Dormancy;
  return std::nullopt;
}

namespace {

const Activity& find_comment(const PostThread& thread,
                             const std::string& comment_id) {
  for (const auto& a : thread.activities) {
    if (a.activity_id == comment_id) {
      if (a.kind == ActivityKind::Reaction) {
        throw Error("activity '" + comment_id + "' is a reaction");
      }
      return a;
    }
  }
  throw Error("no such comment '" + comment_id + "' in post '" +
              thread.post_id + "'");
}

}  // namespace

double influence_ratio(const PostThread& thread, const std::string& comment_id,
                       std::int64_t delta_t_seconds) {
  if (delta_t_seconds < 1) throw Error("delta t must be positive");
  const Activity& c = find_comment(thread, comment_id);
  std::int64_t t = c.timestamp;
  std::int64_t up =
      count_activities(thread, {t, t + delta_t_seconds}) - 1;
  std::int64_t prev =
      count_activities(thread, {t - delta_t_seconds, t}) + 1;
  if (up == 0) return -std::numeric_limits<double>::infinity();
  return std::log(static_cast<double>(up) / static_cast<double>(prev));
}

Piv compute_piv(const PostThread& thread, const std::string& comment_id,
                std::int64_t delta_t_seconds, std::int64_t k) {
  if (delta_t_seconds < 1) throw Error("delta t must be positive");
  if (k < 1) throw Error("component count must be positive");
  const Activity& c = find_comment(thread, comment_id);
  std::int64_t t = c.timestamp;
  Piv piv;
  piv.delta_t_seconds = delta_t_seconds;
  piv.components.reserve(k);
  for (std::int64_t i = 1; i <= k; ++i) {
    piv.components.push_back(count_activities(
        thread, {t - i * delta_t_seconds, t - (i - 1) * delta_t_seconds}));
  }
  return piv;
}

IrDirection ir_label(double ir) {
  return ir > 0.0 ? IrDirection::Increase : IrDirection::Decrease;
}

LifeStage life_stage(double position_ratio) {
  if (position_ratio < 0.0 || position_ratio > 1.0) {
    throw Error("position ratio outside [0, 1]");
  }
  if (position_ratio < 0.50) return LifeStage::RapidGrowth;
  if (position_ratio < 0.85) return LifeStage::SlowDecay;
  return LifeStage::Dormancy;
}

std::vector<IrRecord> extract_ir_dataset(
    const std::vector<PostThread>& threads,
    const std::vector<std::string>& whitelist, const BlacklistIndex& blacklist,
    std::int64_t delta_t_seconds, std::int64_t k, int threads_n) {
  std::vector<std::size_t> order(threads.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return threads[a].post_id < threads[b].post_id;
  });

  std::vector<std::vector<IrRecord>> per_thread(threads.size());
  parallel_for(order.size(),
               static_cast<unsigned>(std::max(threads_n, 1)),
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t oi = begin; oi < end; ++oi) {
      const PostThread& t = threads[order[oi]];
      std::vector<const Activity*> comments;
      for (const auto& a : t.activities) {
        if (a.has_text()) comments.push_back(&a);
      }
      if (comments.empty()) continue;
      auto& out = per_thread[oi];
      for (std::size_t r = 0; r < comments.size(); ++r) {
        const Activity& c = *comments[r];
        if (c.text.empty()) continue;
        auto label = classify_comment(c.text, whitelist, blacklist);
        if (!label) continue;
        IrRecord rec;
        rec.label = *label;
        rec.piv = compute_piv(t, c.activity_id, delta_t_seconds, k);
        rec.sample.post_id = t.post_id;
        rec.sample.comment_id = c.activity_id;
        rec.sample.ir = influence_ratio(t, c.activity_id, delta_t_seconds);
        rec.sample.label = ir_label(rec.sample.ir);
        rec.sample.position_ratio = static_cast<double>(r + 1) /
                                    static_cast<double>(comments.size());
        rec.sample.stage = life_stage(rec.sample.position_ratio);
        if (r > 0) {
          rec.sample.elapsed_since_prev_seconds =
              c.timestamp - comments[r - 1]->timestamp;
        }
        out.push_back(std::move(rec));
      }
    }
  });

  std::vector<IrRecord> records;
  for (auto& v : per_thread) {
    records.insert(records.end(), std::make_move_iterator(v.begin()),
                   std::make_move_iterator(v.end()));
  }
  return records;
}

namespace {

std::string ir_to_string(double ir) {
  if (std::isinf(ir) && ir < 0) return "-inf";
  return format_num(ir);
}

double ir_from_string(const std::string& s) {
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

}  // namespace

std::string ir_csv_string(const std::vector<IrRecord>& records) {
  std::size_t k = records.empty() ? 0 : records.front().piv.components.size();
  std::ostringstream out;
  out << "post_id,comment_id,label_class,label_category,ir,ir_label,stage,"
         "position_ratio,elapsed_prev_s";
  for (std::size_t i = 1; i <= k; ++i) out << ",p" << i;
  out << '\n';
  for (const auto& rec : records) {
    out << csv_escape(rec.sample.post_id) << ','
        << csv_escape(rec.sample.comment_id) << ','
        << url_class_name(rec.label.cls) << ',' << rec.label.category << ','
        << ir_to_string(rec.sample.ir) << ','
        << direction_name(rec.sample.label) << ','
        << stage_name(rec.sample.stage) << ','
        << format_num(rec.sample.position_ratio) << ',';
    if (rec.sample.elapsed_since_prev_seconds) {
      out << *rec.sample.elapsed_since_prev_seconds;
    }
    for (const auto& p : rec.piv.components) out << ',' << p;
    out << '\n';
  }
  return out.str();
}

void write_ir_csv(const std::string& path,
                  const std::vector<IrRecord>& records) {
  atomic_write_file(path, ir_csv_string(records));
}

std::vector<IrRecord> read_ir_csv(const std::string& path,
                                  std::int64_t delta_t_seconds) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty dataset file: " + path);
  auto header = csv_split(trim(line));
  constexpr std::size_t kFixed = 9;
  if (header.size() < kFixed || header[0] != "post_id") {
    throw ParseError("unexpected dataset header", 1);
  }
  std::size_t k = header.size() - kFixed;

  std::vector<IrRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = csv_split(line);
    if (f.size() != kFixed + k) {
      throw ParseError("wrong column count in dataset row", line_no);
    }
    IrRecord rec;
    try {
      rec.sample.post_id = f[0];
      rec.sample.comment_id = f[1];
      auto cls = url_class_from_name(f[2]);
      if (!cls) throw Error("bad class");
      rec.label.cls = *cls;
      rec.label.category = f[3];
      rec.sample.ir = ir_from_string(f[4]);
      auto dir = direction_from_name(f[5]);
      if (!dir) throw Error("bad label");
      rec.sample.label = *dir;
      auto stage = stage_from_name(f[6]);
      if (!stage) throw Error("bad stage");
      rec.sample.stage = *stage;
      rec.sample.position_ratio = std::stod(f[7]);
      if (!f[8].empty()) {
        rec.sample.elapsed_since_prev_seconds = std::stoll(f[8]);
      }
      rec.piv.delta_t_seconds = delta_t_seconds;
      rec.piv.components.reserve(k);
      for (std::size_t i = 0; i < k; ++i) {
        rec.piv.components.push_back(std::stoll(f[kFixed + i]));
      }
    } catch (const std::exception&) {
      throw ParseError("malformed dataset row", line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<StageCdfRow> stage_cdf(const std::vector<IrRecord>& records) {
  std::map<std::string, std::vector<double>> by_class;
  for (const auto& rec : records) {
    by_class[url_class_name(rec.label.cls)].push_back(
        rec.sample.position_ratio);
  }
  std::vector<StageCdfRow> rows;
  for (auto& [cls, ratios] : by_class) {
    std::sort(ratios.begin(), ratios.end());
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      rows.push_back({cls, ratios[i],
                      static_cast<double>(i + 1) /
                          static_cast<double>(ratios.size())});
    }
  }
  return rows;
}

}  // namespace cascadia
