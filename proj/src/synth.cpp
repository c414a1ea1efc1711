#include "cascadia/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

namespace cascadia {

namespace {

constexpr std::int64_t kBaseEpoch = 1600000000;  // thread 0 creation time
constexpr std::int64_t kThreadSpacing = 7200;    // seconds between posts
constexpr double kReactionTail = 10.0;           // minutes a comment attracts

std::string post_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%05zu", index);
  return buf;
}

struct PlantJob {
  PlantSpec spec;
  IrDirection direction = IrDirection::Decrease;
};

struct Event {
  double time = 0.0;  // minutes from thread creation
  bool is_comment = true;
  std::size_t parent = 0;  // comment index, reactions only
  ReactionKind reaction = ReactionKind::Like;
  int plant = -1;  // index into the thread's plant list
  std::string text;
};

struct CommentSlot {
  double time = 0.0;
  int plant = -1;  // -1 for filler
};

double base_intensity(const SynthConfig& cfg, double t,
                      const std::vector<CommentSlot>& comments) {
  double lambda = cfg.base_rate * std::exp(-t / cfg.decay);
  for (const auto& c : comments) {
    if (c.time >= t) break;
    lambda += cfg.excitation * std::exp(-(t - c.time) / cfg.excitation_decay);
  }
  return lambda;
}

std::string plant_host(const PlantSpec& spec) {
  switch (spec.cls) {
    case UrlClass::Whitelist: return "facebook.com";
    case UrlClass::Benign: return "plain-news.test";
    default: return spec.category + "-hub.test";
  }
}

// Rank bands follow the life-stage watersheds over the post-insertion count.
std::pair<std::int64_t, std::int64_t> stage_band(LifeStage stage,
                                                 std::int64_t positions) {
  auto first_at_least = [&](double ratio) {
    return static_cast<std::int64_t>(
        std::ceil(ratio * static_cast<double>(positions)));
  };
  std::int64_t lo = 1, hi = positions;
  switch (stage) {
    case LifeStage::RapidGrowth:
      hi = first_at_least(0.50) - 1;
      break;
    case LifeStage::SlowDecay:
      lo = std::max<std::int64_t>(1, first_at_least(0.50));
      hi = first_at_least(0.85) - 1;
      break;
    case LifeStage::Dormancy:
      lo = std::max<std::int64_t>(1, first_at_least(0.85));
      break;
  }
  return {lo, hi};
}

void generate_thread(const SynthConfig& cfg, std::size_t index,
                     const std::vector<PlantJob>& jobs, PostThread& out,
                     ThreadTruth& truth) {
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(index), 1));
  out.post_id = post_name(index);
  out.page_id = "page0";
  out.created_at = kBaseEpoch + static_cast<std::int64_t>(index) *
                                    kThreadSpacing;
  truth.post_id = out.post_id;

  const double horizon = static_cast<double>(cfg.horizon);

  // Base arrivals by thinning: between events the intensity only decays, so
  // its current value dominates the interval ahead.
  std::vector<CommentSlot> comments;
  {
    double t = 0.0;
    double excite = 0.0;  // excitation sum at time t_mark
    double t_mark = 0.0;
    while (true) {
      double decayed =
          excite * std::exp(-(t - t_mark) / cfg.excitation_decay);
      double bound = cfg.base_rate * std::exp(-t / cfg.decay) + decayed;
      if (bound < 1e-12) break;
      t += rng.next_exp(bound);
      if (t >= horizon) break;
      double lambda = cfg.base_rate * std::exp(-t / cfg.decay) +
                      excite * std::exp(-(t - t_mark) / cfg.excitation_decay);
      if (rng.next_unit() * bound < lambda) {
        comments.push_back({t, -1});
        excite = excite * std::exp(-(t - t_mark) / cfg.excitation_decay) +
                 cfg.excitation;
        t_mark = t;
      }
    }
  }

  // Plant insertion at a uniform rank inside the requested stage band.
  for (std::size_t p = 0; p < jobs.size(); ++p) {
    const PlantJob& job = jobs[p];
    std::int64_t positions = static_cast<std::int64_t>(comments.size()) + 1;
    auto [lo, hi] = stage_band(job.spec.stage, positions);
    if (lo > hi) {
      throw Error("plant stage band is empty in thread " + out.post_id);
    }
    std::int64_t q =
        lo + static_cast<std::int64_t>(rng.next_below(
                 static_cast<std::uint64_t>(hi - lo + 1)));
    double t_lo = q == 1 ? 0.0 : comments[q - 2].time;
    double t_hi = q == positions ? horizon : comments[q - 1].time;
    double t = rng.next_range(t_lo, t_hi);
    comments.insert(comments.begin() + (q - 1),
                    {t, static_cast<int>(p)});
  }

  // Regimes reshape the minute after each plant so the realized influence
  // direction matches the designation.
  if (cfg.ir_regimes) {
    double window = static_cast<double>(cfg.ir_delta_t_seconds) / 60.0;
    std::vector<std::size_t> plant_order;
    for (std::size_t i = 0; i < comments.size(); ++i) {
      if (comments[i].plant >= 0) plant_order.push_back(i);
    }
    // Work on times, re-locating plants by identity as the list mutates.
    std::vector<double> plant_times;
    plant_times.reserve(plant_order.size());
    for (auto i : plant_order) plant_times.push_back(comments[i].time);
    std::vector<int> plant_ids;
    for (auto i : plant_order) plant_ids.push_back(comments[i].plant);

    for (std::size_t pi = 0; pi < plant_times.size(); ++pi) {
      double t_p = plant_times[pi];
      IrDirection dir = jobs[static_cast<std::size_t>(plant_ids[pi])].direction;
      double t_end = std::min(t_p + window, horizon);
      if (dir == IrDirection::Increase) {
        double extra = (cfg.ir_regimes->first - 1.0) *
                       std::max(base_intensity(cfg, t_p, comments), 0.05);
        if (extra > 0.0) {
          double t = t_p;
          while (true) {
            t += rng.next_exp(extra);
            if (t >= t_end) break;
            comments.push_back({t, -1});
          }
          std::sort(comments.begin(), comments.end(),
                    [](const CommentSlot& a, const CommentSlot& b) {
                      return a.time < b.time;
                    });
        }
      } else {
        double keep = cfg.ir_regimes->second;
        std::vector<CommentSlot> kept;
        kept.reserve(comments.size());
        for (const auto& c : comments) {
          bool in_window = c.time > t_p && c.time < t_end;
          if (in_window && c.plant < 0 && rng.next_unit() >= keep) continue;
          kept.push_back(c);
        }
        comments = std::move(kept);
      }
    }
  }

  // Assemble events: comments, then reaction tails per comment.
  std::vector<Event> events;
  events.reserve(comments.size() * 2);
  for (std::size_t i = 0; i < comments.size(); ++i) {
    Event e;
    e.time = comments[i].time;
    e.is_comment = true;
    e.plant = comments[i].plant;
    if (e.plant >= 0) {
      const PlantSpec& spec = jobs[static_cast<std::size_t>(e.plant)].spec;
      e.text = "shared http://" + plant_host(spec) + "/s" +
               std::to_string(rng.next_below(100000));
    } else {
      e.text = "filler note " + std::to_string(rng.next_below(100000));
    }
    events.push_back(std::move(e));
  }
  std::size_t n_comments = events.size();
  if (cfg.reaction_rate > 0.0) {
    static const ReactionKind kinds[] = {ReactionKind::Like, ReactionKind::Love,
                                         ReactionKind::Haha, ReactionKind::Wow,
                                         ReactionKind::Sad, ReactionKind::Angry};
    for (std::size_t i = 0; i < n_comments; ++i) {
      double t = events[i].time;
      double cutoff = events[i].time + kReactionTail;
      while (true) {
        t += rng.next_exp(cfg.reaction_rate);
        if (t >= cutoff) break;
        Event e;
        e.time = t;
        e.is_comment = false;
        e.parent = i;
        e.reaction = kinds[rng.next_below(6)];
        events.push_back(std::move(e));
      }
    }
  }

  std::vector<std::size_t> order(events.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return events[a].time < events[b].time;
                   });
  std::vector<std::string> ids(events.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "a%06zu", rank);
    ids[order[rank]] = buf;
  }

  out.activities.reserve(events.size());
  std::vector<PlantTruth> plants(jobs.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Event& e = events[order[rank]];
    Activity a;
    a.activity_id = ids[order[rank]];
    a.actor_id = "u" + std::to_string(rng.next_below(100000));
    a.timestamp =
        out.created_at + static_cast<std::int64_t>(std::llround(e.time * 60.0));
    if (e.is_comment) {
      a.kind = ActivityKind::Comment;
      a.text = e.text;
      if (e.plant >= 0) {
        const PlantJob& job = jobs[static_cast<std::size_t>(e.plant)];
        PlantTruth& pt = plants[static_cast<std::size_t>(e.plant)];
        pt.comment_id = a.activity_id;
        pt.direction = job.direction;
        pt.stage = job.spec.stage;
        pt.label.cls = job.spec.cls;
        if (job.spec.cls == UrlClass::Light ||
            job.spec.cls == UrlClass::Critical) {
          pt.label.category = job.spec.category;
        }
      }
    } else {
      a.kind = ActivityKind::Reaction;
      a.reaction_kind = e.reaction;
      a.parent_id = ids[e.parent];
    }
    out.activities.push_back(std::move(a));
  }
  std::sort(out.activities.begin(), out.activities.end(),
            [](const Activity& x, const Activity& y) {
              if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
              return x.activity_id < y.activity_id;
            });

  truth.plants = std::move(plants);
  for (const auto& p : truth.plants) {
    if (p.label.cls == UrlClass::Light || p.label.cls == UrlClass::Critical) {
      truth.target = true;
    }
  }
}

}  // namespace

std::pair<std::vector<PostThread>, SynthGroundTruth> generate(
    const SynthConfig& config, int workers) {
  if (config.n_threads < 0) throw Error("thread count must be non-negative");
  if (config.base_rate < 0 || config.excitation < 0 ||
      config.reaction_rate < 0) {
    throw Error("rates must be non-negative");
  }
  if (config.decay <= 0 || config.excitation_decay <= 0) {
    throw Error("decay constants must be positive");
  }
  if (config.horizon < 1) throw Error("horizon must be positive");
  if (config.ir_delta_t_seconds < 1) throw Error("delta t must be positive");
  if (config.ir_regimes) {
    if (config.ir_regimes->first < 1.0) {
      throw Error("boost factor must be at least 1");
    }
    if (config.ir_regimes->second < 0.0 || config.ir_regimes->second > 1.0) {
      throw Error("suppress factor must lie in [0, 1]");
    }
  }
  for (const auto& spec : config.plants) {
    if (spec.count < 0) throw Error("plant count must be non-negative");
    if (spec.cls == UrlClass::Light || spec.cls == UrlClass::Critical) {
      auto severity = category_severity(spec.category);
      if (!severity || *severity != spec.cls) {
        throw Error("plant category '" + spec.category +
                    "' does not belong to class " + url_class_name(spec.cls));
      }
    }
  }

  // Assign plant instances to threads up front with the master stream, so
  // per-thread generation stays independent of worker scheduling.
  std::size_t n = static_cast<std::size_t>(config.n_threads);
  std::vector<std::vector<PlantJob>> jobs(n);
  Rng master(mix_seed(config.seed, 0, 0));
  for (const auto& spec : config.plants) {
    for (std::int64_t c = 0; c < spec.count; ++c) {
      if (n == 0) throw Error("plants configured with zero threads");
      std::size_t tid = master.next_below(n);
      PlantJob job;
      job.spec = spec;
      job.direction = spec.stage == LifeStage::RapidGrowth
                          ? IrDirection::Increase
                          : IrDirection::Decrease;
      jobs[tid].push_back(job);
    }
  }

  std::vector<PostThread> threads(n);
  SynthGroundTruth truth;
  truth.threads.resize(n);
  parallel_for(n, static_cast<unsigned>(std::max(workers, 1)),
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      generate_thread(config, i, jobs[i], threads[i], truth.threads[i]);
    }
  });
  return {std::move(threads), std::move(truth)};
}

void emit(const std::vector<PostThread>& threads, const std::string& path) {
  std::ostringstream out;
  write_threads(out, threads);
  atomic_write_file(path, out.str());
}

namespace {

LifeStage parse_stage(const std::string& s) {
  auto stage = stage_from_name(s);
  if (!stage) throw Error("unknown stage '" + s + "'");
  return *stage;
}

}  // namespace

SynthConfig parse_synth_config_text(const std::string& text) {
  SynthConfig cfg;
  cfg.plants.clear();
  std::optional<double> boost, suppress;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key = value", line_no);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n_threads") cfg.n_threads = std::stoll(value);
      else if (key == "base_rate") cfg.base_rate = std::stod(value);
      else if (key == "decay") cfg.decay = std::stod(value);
      else if (key == "excitation") cfg.excitation = std::stod(value);
      else if (key == "excitation_decay") cfg.excitation_decay = std::stod(value);
      else if (key == "reaction_rate") cfg.reaction_rate = std::stod(value);
      else if (key == "horizon") cfg.horizon = std::stoll(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "ir_boost") boost = std::stod(value);
      else if (key == "ir_suppress") suppress = std::stod(value);
      else if (key == "ir_delta_t_s") cfg.ir_delta_t_seconds = std::stoll(value);
      else if (key == "plant") {
        auto f = csv_split(value);
        if (f.size() != 4) throw Error("plant needs class,category,stage,count");
        PlantSpec spec;
        auto cls = url_class_from_name(trim(f[0]));
        if (!cls) throw Error("unknown class '" + f[0] + "'");
        spec.cls = *cls;
        spec.category = trim(f[1]);
        if (spec.category == "-") spec.category.clear();
        spec.stage = parse_stage(trim(f[2]));
        spec.count = std::stoll(trim(f[3]));
        cfg.plants.push_back(spec);
      } else {
        throw Error("unknown key '" + key + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (boost.has_value() != suppress.has_value()) {
    throw Error("ir_boost and ir_suppress must be set together");
  }
  if (boost) cfg.ir_regimes = {*boost, *suppress};
  return cfg;
}

SynthConfig parse_synth_config(const std::string& path) {
  return parse_synth_config_text(read_file(path));
}

void write_ground_truth(const SynthGroundTruth& truth,
                        const std::string& path) {
  std::ostringstream out;
  out << "post_id,comment_id,class,category,stage,direction\n";
  for (const auto& t : truth.threads) {
    for (const auto& p : t.plants) {
      out << t.post_id << ',' << p.comment_id << ','
          << url_class_name(p.label.cls) << ',' << p.label.category << ','
          << stage_name(p.stage) << ',' << direction_name(p.direction) << '\n';
    }
  }
  atomic_write_file(path, out.str());
}

std::vector<std::string> fixture_whitelist() {
  return {"facebook.com", "youtube.com", "en.wikipedia.org", "plain-wiki.test"};
}

BlacklistIndex fixture_blacklist() {
  BlacklistIndex index;
  static const char* cats[] = {"advertising", "shopping", "gamble",
                               "porn",        "download", "hacking",
                               "spyware",     "aggressive", "drugs",
                               "weapons",     "violence"};
  for (const char* cat : cats) {
    std::string category(cat);
    index.category_to_class[category] = *category_severity(category);
    index.host_to_category[category + "-hub.test"] = category;
    index.host_to_category[category + "-mirror.test"] = category;
  }
  return index;
}

void write_fixture_lists(const std::string& dir) {
  std::string wl;
  for (const auto& host : fixture_whitelist()) wl += host + '\n';
  atomic_write_file(dir + "/whitelist.txt", wl);

  BlacklistIndex index = fixture_blacklist();
  std::map<std::string, std::string> files;  // category -> contents
  for (const auto& [host, category] : index.host_to_category) {
    files[category] += host + '\n';
  }
  for (const auto& [category, contents] : files) {
    atomic_write_file(dir + "/blacklist/" + category + "/domains", contents);
  }
}

}  // namespace cascadia
