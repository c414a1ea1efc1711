#include "cascadia/ingest.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include "cascadia/error.hpp"
#include "json.hpp"

namespace cascadia {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string require_string(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw ParseError("missing or non-string field '" + std::string(field) + "'",
                     line);
  }
  return it->get<std::string>();
}

std::int64_t require_int(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    throw ParseError(
        "missing or non-integer field '" + std::string(field) + "'", line);
  }
  return it->get<std::int64_t>();
}

}  // namespace

const char* kind_name(ActivityKind k) {
  switch (k) {
    case ActivityKind::Comment: return "comment";
    case ActivityKind::Reply: return "reply";
    case ActivityKind::Reaction: return "reaction";
  }
  return "comment";
}

const char* reaction_name(ReactionKind k) {
  switch (k) {
    case ReactionKind::Like: return "like";
    case ReactionKind::Love: return "love";
    case ReactionKind::Haha: return "haha";
    case ReactionKind::Wow: return "wow";
    case ReactionKind::Sad: return "sad";
    case ReactionKind::Angry: return "angry";
  }
  return "like";
}

std::optional<ActivityKind> kind_from_name(const std::string& name) {
  if (name == "comment") return ActivityKind::Comment;
  if (name == "reply") return ActivityKind::Reply;
  if (name == "reaction") return ActivityKind::Reaction;
  return std::nullopt;
}

std::optional<ReactionKind> reaction_from_name(const std::string& name) {
  if (name == "like") return ReactionKind::Like;
  if (name == "love") return ReactionKind::Love;
  if (name == "haha") return ReactionKind::Haha;
  if (name == "wow") return ReactionKind::Wow;
  if (name == "sad") return ReactionKind::Sad;
  if (name == "angry") return ReactionKind::Angry;
  return std::nullopt;
}

std::vector<PostThread> parse_thread_file(std::istream& in) {
  // Threads keyed by post id, in first-seen order. Activities may arrive
  // before their post record, so membership is validated after the last line.
  std::vector<PostThread> threads;
  std::unordered_map<std::string, std::size_t> index;
  std::map<std::string, std::vector<std::pair<Activity, std::size_t>>> pending;
  std::set<std::pair<std::string, std::string>> seen_activity_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("record is not an object", line_no);
    std::string type = require_string(j, "type", line_no);

    if (type == "post") {
      PostThread t;
      t.post_id = require_string(j, "post_id", line_no);
      t.page_id = require_string(j, "page_id", line_no);
      t.created_at = require_int(j, "created_at", line_no);
      if (index.count(t.post_id)) {
        throw ParseError("duplicate post record '" + t.post_id + "'", line_no);
      }
      index.emplace(t.post_id, threads.size());
      threads.push_back(std::move(t));
    } else if (type == "activity") {
      std::string post_id = require_string(j, "post_id", line_no);
      Activity a;
      a.activity_id = require_string(j, "activity_id", line_no);
      std::string kind = require_string(j, "kind", line_no);
      auto k = kind_from_name(kind);
      if (!k) throw ParseError("unknown kind '" + kind + "'", line_no);
      a.kind = *k;
      if (a.kind == ActivityKind::Reaction) {
        std::string rk = require_string(j, "reaction_kind", line_no);
        auto r = reaction_from_name(rk);
        if (!r) {
          throw ParseError("unknown reaction_kind '" + rk + "'", line_no);
        }
        a.reaction_kind = *r;
        if (j.contains("text")) {
          throw ParseError("reaction carries a text field", line_no);
        }
      } else {
        if (j.contains("reaction_kind")) {
          throw ParseError("reaction_kind on a non-reaction", line_no);
        }
        if (auto it = j.find("text"); it != j.end()) {
          if (!it->is_string()) {
            throw ParseError("non-string field 'text'", line_no);
          }
          a.text = it->get<std::string>();
        }
      }
      a.actor_id = require_string(j, "actor_id", line_no);
      a.timestamp = require_int(j, "timestamp", line_no);
      if (auto it = j.find("parent_id"); it != j.end()) {
        if (!it->is_string()) {
          throw ParseError("non-string field 'parent_id'", line_no);
        }
        a.parent_id = it->get<std::string>();
      }
      if (!seen_activity_ids.insert({post_id, a.activity_id}).second) {
        throw ParseError("duplicate activity id '" + a.activity_id +
                             "' in thread '" + post_id + "'",
                         line_no);
      }
      auto it = index.find(post_id);
      if (it != index.end()) {
        threads[it->second].activities.push_back(std::move(a));
      } else {
        pending[post_id].emplace_back(std::move(a), line_no);
      }
    } else {
      throw ParseError("unknown record type '" + type + "'", line_no);
    }
  }

  for (auto& [post_id, acts] : pending) {
    auto it = index.find(post_id);
    if (it == index.end()) {
      throw ParseError("activity references unknown post '" + post_id + "'",
                       acts.front().second);
    }
    for (auto& [a, ln] : acts) {
      (void)ln;
      threads[it->second].activities.push_back(std::move(a));
    }
  }

  for (auto& t : threads) {
    for (const auto& a : t.activities) {
      if (a.timestamp < t.created_at) {
        throw Error("activity '" + a.activity_id + "' predates post '" +
                    t.post_id + "'");
      }
    }
    std::sort(t.activities.begin(), t.activities.end(),
              [](const Activity& x, const Activity& y) {
                if (x.timestamp != y.timestamp) {
                  return x.timestamp < y.timestamp;
                }
                return x.activity_id < y.activity_id;
              });
  }
  return threads;
}

void write_threads(std::ostream& out, const std::vector<PostThread>& threads) {
  for (const auto& t : threads) {
    ordered_json j;
    j["type"] = "post";
    j["post_id"] = t.post_id;
    j["page_id"] = t.page_id;
    j["created_at"] = t.created_at;
    out << j.dump() << '\n';
    for (const auto& a : t.activities) {
      ordered_json ja;
      ja["type"] = "activity";
      ja["post_id"] = t.post_id;
      ja["activity_id"] = a.activity_id;
      ja["kind"] = kind_name(a.kind);
      if (a.reaction_kind) ja["reaction_kind"] = reaction_name(*a.reaction_kind);
      ja["actor_id"] = a.actor_id;
      ja["timestamp"] = a.timestamp;
      if (a.parent_id) ja["parent_id"] = *a.parent_id;
      if (a.kind != ActivityKind::Reaction) ja["text"] = a.text;
      out << ja.dump() << '\n';
    }
  }
}

std::int64_t count_activities(const PostThread& thread, TimeWindow window) {
  if (window.end <= window.start) {
    throw Error("window end must be greater than start");
  }
  const auto& acts = thread.activities;
  auto lower = std::lower_bound(
      acts.begin(), acts.end(), window.start,
      [](const Activity& a, std::int64_t t) { return a.timestamp < t; });
  auto upper = std::lower_bound(
      acts.begin(), acts.end(), window.end,
      [](const Activity& a, std::int64_t t) { return a.timestamp < t; });
  return upper - lower;
}

std::int64_t n_comment(const PostThread& thread, std::int64_t minutes) {
  if (minutes < 0) throw Error("minutes must be non-negative");
  std::int64_t cutoff = thread.created_at + minutes * 60;
  std::int64_t n = 0;
  for (const auto& a : thread.activities) {
    if (a.timestamp >= cutoff) break;
    if (a.kind == ActivityKind::Comment) ++n;
  }
  return n;
}

std::int64_t acc_n_comment(const PostThread& thread, std::int64_t window_index,
                           std::int64_t window_minutes) {
  if (window_index < 1) throw Error("window index must be positive");
  if (window_minutes < 1) throw Error("window minutes must be positive");
  return n_comment(thread, window_index * window_minutes) -
         n_comment(thread, (window_index - 1) * window_minutes);
}

std::int64_t final_comment_count(const PostThread& thread,
                                 std::int64_t final_minutes) {
  if (final_minutes == kFinalAllMinutes) {
    std::int64_t n = 0;
    for (const auto& a : thread.activities) {
      if (a.kind == ActivityKind::Comment) ++n;
    }
    return n;
  }
  return n_comment(thread, final_minutes);
}

PostThread shift_thread(const PostThread& thread, std::int64_t delta_seconds) {
  PostThread out = thread;
  out.created_at += delta_seconds;
  for (auto& a : out.activities) a.timestamp += delta_seconds;
  return out;
}

}  // namespace cascadia
