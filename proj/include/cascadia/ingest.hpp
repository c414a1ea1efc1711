#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cascadia {

enum class ActivityKind { Comment, Reply, Reaction };
enum class ReactionKind { Like, Love, Haha, Wow, Sad, Angry };

struct Activity {
  std::string activity_id;
  ActivityKind kind = ActivityKind::Comment;
  std::optional<ReactionKind> reaction_kind;  // engaged iff kind == Reaction
  std::string actor_id;
  std::int64_t timestamp = 0;  // seconds since epoch
  std::optional<std::string> parent_id;
  std::string text;  // always empty for reactions

  bool has_text() const { return kind != ActivityKind::Reaction; }
  bool operator==(const Activity&) const = default;
};

// One original post plus its activities, sorted by (timestamp, activity_id).
// Every timestamp is >= created_at and activity ids are unique.
struct PostThread {
  std::string post_id;
  std::string page_id;
  std::int64_t created_at = 0;
  std::vector<Activity> activities;

  bool operator==(const PostThread&) const = default;
};

struct TimeWindow {
  std::int64_t start = 0;  // inclusive
  std::int64_t end = 0;    // exclusive, must be > start
};

// Reads line-delimited records (one JSON object per line). Post records may
// appear before or after their activities; activities are sorted here.
// Throws ParseError on malformed lines, duplicate ids, or dangling post
// references.
std::vector<PostThread> parse_thread_file(std::istream& in);

// Inverse of parse_thread_file: post line first, then activities in order.
void write_threads(std::ostream& out, const std::vector<PostThread>& threads);

// Number of activities of any kind with timestamp in [start, end).
std::int64_t count_activities(const PostThread& thread, TimeWindow window);

// Top-level comments (kind == Comment) created before created_at + minutes.
std::int64_t n_comment(const PostThread& thread, std::int64_t minutes);

// Comments gained in window i: n_comment(i*w) - n_comment((i-1)*w).
std::int64_t acc_n_comment(const PostThread& thread, std::int64_t window_index,
                           std::int64_t window_minutes);

// Sentinel for "count every comment ever seen" instead of a cutoff.
inline constexpr std::int64_t kFinalAllMinutes = -1;

// n_comment at final_minutes, or the all-time comment count on the sentinel.
std::int64_t final_comment_count(const PostThread& thread,
                                 std::int64_t final_minutes);

// Shifts created_at and every activity timestamp by delta seconds.
PostThread shift_thread(const PostThread& thread, std::int64_t delta_seconds);

const char* kind_name(ActivityKind k);
const char* reaction_name(ReactionKind k);
std::optional<ActivityKind> kind_from_name(const std::string& name);
std::optional<ReactionKind> reaction_from_name(const std::string& name);

}  // namespace cascadia
