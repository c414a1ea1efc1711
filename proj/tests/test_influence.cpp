#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cascadia/error.hpp"
#include "cascadia/influence.hpp"
#include "cascadia/util.hpp"

using namespace cascadia;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Thread builder: each entry is (seconds after creation, kind, text).
struct Entry {
  std::int64_t offset;
  ActivityKind kind;
  std::string text;
};

PostThread make_thread(const std::string& id, const std::vector<Entry>& items,
                       std::int64_t created_at = 100000) {
  PostThread t;
  t.post_id = id;
  t.page_id = "g";
  t.created_at = created_at;
  int n = 0;
  for (const auto& e : items) {
    Activity a;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "a%03d", n++);
    a.activity_id = buf;
    a.kind = e.kind;
    if (e.kind == ActivityKind::Reaction) {
      a.reaction_kind = ReactionKind::Like;
    } else {
      a.text = e.text;
    }
    a.actor_id = "u";
    a.timestamp = created_at + e.offset;
    t.activities.push_back(std::move(a));
  }
  std::sort(t.activities.begin(), t.activities.end(),
            [](const Activity& x, const Activity& y) {
              if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
              return x.activity_id < y.activity_id;
            });
  return t;
}

PostThread random_activity_thread(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<Entry> items;
  for (std::size_t i = 0; i < n; ++i) {
    ActivityKind kind;
    switch (rng.next_below(3)) {
      case 0: kind = ActivityKind::Comment; break;
      case 1: kind = ActivityKind::Reply; break;
      default: kind = ActivityKind::Reaction; break;
    }
    items.push_back({static_cast<std::int64_t>(rng.next_below(7200)), kind,
                     kind == ActivityKind::Reaction ? "" : "note"});
  }
  return make_thread("p" + std::to_string(seed), items);
}

BlacklistIndex fixture_index() {
  BlacklistIndex index;
  index.host_to_category["shop.example"] = "shopping";
  index.host_to_category["nasty.example"] = "porn";
  index.host_to_category["evil.example"] = "spyware";
  index.category_to_class["shopping"] = UrlClass::Light;
  index.category_to_class["porn"] = UrlClass::Light;
  index.category_to_class["spyware"] = UrlClass::Critical;
  return index;
}

const std::vector<std::string> kWhitelist = {"facebook.com"};

}  // namespace

TEST_SUITE("influence") {

TEST_CASE("influence_ratio hand-built windows") {
  // Window dt = 60. Comment a002 at +300 with one activity in the minute
  // before (prev = 1+1 = 2) and nine in [t, t+60) including itself
  // (up = 9-1 = 8): IR = ln(8/2) = ln 4.
  std::vector<Entry> items = {{200, ActivityKind::Comment, "long before"},
                              {290, ActivityKind::Reaction, ""},
                              {300, ActivityKind::Comment, "probe"}};
  for (int i = 0; i < 8; ++i) {
    items.push_back({305 + i, ActivityKind::Reaction, ""});
  }
  auto t = make_thread("p", items);
  CHECK(influence_ratio(t, "a002", 60) == std::log(4.0));

  // Symmetric windows: raw prev 1 -> prev 2, comment + 2 -> up 2.
  auto sym = make_thread("p", {{240, ActivityKind::Reaction, ""},
                               {300, ActivityKind::Comment, "probe"},
                               {310, ActivityKind::Reaction, ""},
                               {320, ActivityKind::Reply, "r"}});
  CHECK(influence_ratio(sym, "a001", 60) == 0.0);

  // Nothing after the comment: up = 0 -> negative infinity -> Decrease.
  auto quiet = make_thread("p", {{100, ActivityKind::Comment, "x"},
                                 {300, ActivityKind::Comment, "probe"}});
  CHECK(influence_ratio(quiet, "a001", 60) == kNegInf);
  CHECK(ir_label(influence_ratio(quiet, "a001", 60)) == IrDirection::Decrease);

  CHECK_THROWS_AS(influence_ratio(t, "missing", 60), Error);
  CHECK_THROWS_AS(influence_ratio(t, "a002", 0), Error);
  // Reactions have no influence ratio of their own.
  CHECK_THROWS_AS(influence_ratio(t, "a003", 60), Error);
}

TEST_CASE("influence_ratio matches a linear window recount") {
  for (std::uint64_t seed : {301ull, 302ull, 303ull}) {
    auto t = random_activity_thread(seed, 200);
    for (const auto& a : t.activities) {
      if (a.kind == ActivityKind::Reaction) continue;
      std::int64_t up = -1, prev = 1;  // the comment itself
      for (const auto& other : t.activities) {
        if (other.timestamp >= a.timestamp &&
            other.timestamp < a.timestamp + 60) {
          ++up;
        }
        if (other.timestamp >= a.timestamp - 60 &&
            other.timestamp < a.timestamp) {
          ++prev;
        }
      }
      double expect = up == 0 ? kNegInf
                              : std::log(static_cast<double>(up) /
                                         static_cast<double>(prev));
      REQUIRE(influence_ratio(t, a.activity_id, 60) == expect);
    }
  }
}

TEST_CASE("finite IR negates when the window counts swap") {
  // Effective counts (U, P) need raw prev = P-1 and raw up = U+1.
  auto build = [](std::int64_t u, std::int64_t p) {
    std::vector<Entry> items;
    for (std::int64_t i = 0; i < p - 1; ++i) {
      items.push_back({240 + i, ActivityKind::Reaction, ""});
    }
    items.push_back({300, ActivityKind::Comment, "probe"});
    for (std::int64_t i = 0; i < u; ++i) {
      items.push_back({301 + i, ActivityKind::Reaction, ""});
    }
    return make_thread("p", items);
  };
  for (auto [u, p] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {2, 3}, {5, 1}, {4, 4}, {1, 7}}) {
    auto ta = build(u, p);
    auto tb = build(p, u);
    std::string probe_a = "a" + std::string(p - 1 < 10 ? "00" : "0") +
                          std::to_string(p - 1);
    std::string probe_b = "a" + std::string(u - 1 < 10 ? "00" : "0") +
                          std::to_string(u - 1);
    double ira = influence_ratio(ta, probe_a, 60);
    double irb = influence_ratio(tb, probe_b, 60);
    REQUIRE(ira == doctest::Approx(-irb).epsilon(1e-14));
  }
}

TEST_CASE("compute_piv buckets preceding activity") {
  // Silent preceding hour.
  auto lone = make_thread("p", {{7200, ActivityKind::Comment, "x"}});
  auto quiet = compute_piv(lone, "a000", 60, 60);
  CHECK(quiet.components == std::vector<std::int64_t>(60, 0));

  // Activities 30s, 90s, and 4000s before the comment: buckets 1 and 2 get
  // one hit each; 4000s back is bucket 67, beyond k = 60.
  auto spread = make_thread("p", {{5000 - 4000, ActivityKind::Reaction, ""},
                                  {5000 - 90, ActivityKind::Reply, "r"},
                                  {5000 - 30, ActivityKind::Reaction, ""},
                                  {5000, ActivityKind::Comment, "probe"}});
  auto piv = compute_piv(spread, "a003", 60, 60);
  REQUIRE(piv.components.size() == 60);
  CHECK(piv.components[0] == 1);
  CHECK(piv.components[1] == 1);
  CHECK(std::accumulate(piv.components.begin(), piv.components.end(),
                        std::int64_t{0}) == 2);

  // Short vectors stop early; the comment itself is never counted.
  auto shortp = compute_piv(spread, "a003", 60, 2);
  CHECK(shortp.components == std::vector<std::int64_t>{1, 1});

  CHECK_THROWS_AS(compute_piv(spread, "a003", 0, 60), Error);
  CHECK_THROWS_AS(compute_piv(spread, "a003", 60, 0), Error);
  CHECK_THROWS_AS(compute_piv(spread, "nope", 60, 60), Error);
}

TEST_CASE("piv components sum to the window activity count") {
  for (std::uint64_t seed : {311ull, 312ull}) {
    auto t = random_activity_thread(seed, 150);
    for (const auto& a : t.activities) {
      if (a.kind == ActivityKind::Reaction) continue;
      for (std::int64_t k : {1, 7, 60}) {
        auto piv = compute_piv(t, a.activity_id, 60, k);
        std::int64_t expect = 0;
        for (const auto& other : t.activities) {
          if (other.timestamp >= a.timestamp - k * 60 &&
              other.timestamp < a.timestamp) {
            ++expect;
          }
        }
        REQUIRE(std::accumulate(piv.components.begin(), piv.components.end(),
                                std::int64_t{0}) == expect);
      }
    }
  }
}

TEST_CASE("IR and PIV are invariant under time translation") {
  auto t = random_activity_thread(321, 120);
  auto shifted = shift_thread(t, 86400);
  for (const auto& a : t.activities) {
    if (a.kind == ActivityKind::Reaction) continue;
    double base = influence_ratio(t, a.activity_id, 60);
    double moved = influence_ratio(shifted, a.activity_id, 60);
    if (std::isinf(base)) {
      REQUIRE(moved == base);
    } else {
      REQUIRE(moved == base);  // identical counts, identical log
    }
    REQUIRE(compute_piv(shifted, a.activity_id, 60, 60).components ==
            compute_piv(t, a.activity_id, 60, 60).components);
  }
}

TEST_CASE("ir_label threshold sits at zero") {
  CHECK(ir_label(0.7) == IrDirection::Increase);
  CHECK(ir_label(1e-12) == IrDirection::Increase);
  CHECK(ir_label(0.0) == IrDirection::Decrease);
  CHECK(ir_label(-0.3) == IrDirection::Decrease);
  CHECK(ir_label(kNegInf) == IrDirection::Decrease);
}

TEST_CASE("life_stage watersheds") {
  CHECK(life_stage(0.0) == LifeStage::RapidGrowth);
  CHECK(life_stage(470.0 / 942.0) == LifeStage::RapidGrowth);
  CHECK(life_stage(0.499999) == LifeStage::RapidGrowth);
  CHECK(life_stage(0.50) == LifeStage::SlowDecay);
  CHECK(life_stage(0.60) == LifeStage::SlowDecay);
  CHECK(life_stage(0.849999) == LifeStage::SlowDecay);
  CHECK(life_stage(0.85) == LifeStage::Dormancy);
  CHECK(life_stage(2802.0 / 2844.0) == LifeStage::Dormancy);
  CHECK(life_stage(1.0) == LifeStage::Dormancy);
  CHECK_THROWS_AS(life_stage(-0.01), Error);
  CHECK_THROWS_AS(life_stage(1.01), Error);

  // Monotone: stages never move backwards as the ratio grows.
  int prev = 0;
  for (double r = 0.0; r <= 1.0; r += 0.001) {
    int cur = static_cast<int>(life_stage(r));
    REQUIRE(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("extract_ir_dataset selects URL comments in stable order") {
  auto index = fixture_index();
  // Thread with four text activities; two carry URLs.
  auto t1 = make_thread(
      "beta", {{60, ActivityKind::Comment, "plain words"},
               {120, ActivityKind::Comment, "see http://shop.example/x"},
               {180, ActivityKind::Reaction, ""},
               {240, ActivityKind::Reply,
                "both http://plain.test and http://nasty.example"},
               {300, ActivityKind::Comment, "https://facebook.com/ignored"}});
  auto t2 = make_thread(
      "alpha", {{30, ActivityKind::Comment, "go http://evil.example/payload"}});
  auto none = make_thread("gamma", {{10, ActivityKind::Comment, "quiet"}});

  auto records =
      extract_ir_dataset({t1, t2, none}, kWhitelist, index, 60, 5, 1);
  REQUIRE(records.size() == 3);

  // Sorted by post_id: alpha first, then beta's records in comment order.
  CHECK(records[0].sample.post_id == "alpha");
  CHECK(records[0].label == UrlLabel{UrlClass::Critical, "spyware"});
  CHECK_FALSE(records[0].sample.elapsed_since_prev_seconds.has_value());
  CHECK(records[0].sample.position_ratio == 1.0);

  CHECK(records[1].sample.post_id == "beta");
  CHECK(records[1].sample.comment_id == "a001");
  CHECK(records[1].label == UrlLabel{UrlClass::Light, "shopping"});
  // Rank 2 of 4 text-bearing activities.
  CHECK(records[1].sample.position_ratio == doctest::Approx(0.5));
  CHECK(records[1].sample.elapsed_since_prev_seconds == 60);

  CHECK(records[2].sample.comment_id == "a003");
  // Benign + porn resolves to the worst non-whitelist label.
  CHECK(records[2].label == UrlLabel{UrlClass::Light, "porn"});
  CHECK(records[2].sample.position_ratio == doctest::Approx(0.75));
  CHECK(records[2].sample.elapsed_since_prev_seconds == 120);
  CHECK(records[2].sample.stage ==
        life_stage(records[2].sample.position_ratio));

  for (const auto& rec : records) {
    REQUIRE(rec.piv.components.size() == 5);
    REQUIRE(rec.sample.label == ir_label(rec.sample.ir));
    REQUIRE(rec.sample.stage == life_stage(rec.sample.position_ratio));
  }

  CHECK(extract_ir_dataset({none}, kWhitelist, index, 60, 5, 1).empty());
}

TEST_CASE("extraction is independent of the worker count") {
  auto index = fixture_index();
  std::vector<PostThread> corpus;
  Rng rng(331);
  for (int i = 0; i < 40; ++i) {
    std::vector<Entry> items;
    std::size_t n = 5 + rng.next_below(30);
    for (std::size_t j = 0; j < n; ++j) {
      std::int64_t off = static_cast<std::int64_t>(rng.next_below(3600));
      switch (rng.next_below(4)) {
        case 0:
          items.push_back({off, ActivityKind::Comment,
                           "see http://shop.example/" + std::to_string(j)});
          break;
        case 1:
          items.push_back({off, ActivityKind::Comment, "no links"});
          break;
        case 2:
          items.push_back({off, ActivityKind::Reply,
                           "bad http://evil.example/" + std::to_string(j)});
          break;
        default:
          items.push_back({off, ActivityKind::Reaction, ""});
          break;
      }
    }
    corpus.push_back(make_thread("p" + std::to_string(100 + i), items));
  }
  auto base = extract_ir_dataset(corpus, kWhitelist, index, 60, 10, 1);
  CHECK_FALSE(base.empty());
  for (int workers : {2, 3, 8}) {
    auto other = extract_ir_dataset(corpus, kWhitelist, index, 60, 10,
                                    workers);
    REQUIRE(ir_csv_string(other) == ir_csv_string(base));
  }
}

TEST_CASE("ir csv writes, reads back, and rewrites identically") {
  auto index = fixture_index();
  auto t = make_thread(
      "p1", {{60, ActivityKind::Comment, "first http://shop.example"},
             {90, ActivityKind::Reaction, ""},
             {5000, ActivityKind::Comment, "last http://plain.test"}});
  auto records = extract_ir_dataset({t}, kWhitelist, index, 60, 4, 1);
  REQUIRE(records.size() == 2);
  // The trailing comment has a silent upcoming window: -inf must survive IO.
  REQUIRE(records[1].sample.ir == kNegInf);

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "cascadia_ir_io";
  fs::remove_all(dir);
  auto path = (dir / "dataset.csv").string();
  write_ir_csv(path, records);

  auto back = read_ir_csv(path, 60);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].sample.post_id == records[i].sample.post_id);
    CHECK(back[i].sample.comment_id == records[i].sample.comment_id);
    CHECK(back[i].label == records[i].label);
    CHECK(back[i].sample.label == records[i].sample.label);
    CHECK(back[i].sample.stage == records[i].sample.stage);
    CHECK(back[i].sample.elapsed_since_prev_seconds ==
          records[i].sample.elapsed_since_prev_seconds);
    CHECK(back[i].piv.components == records[i].piv.components);
    CHECK(back[i].piv.delta_t_seconds == 60);
  }
  CHECK(back[1].sample.ir == kNegInf);

  // Round-trip idempotence at the byte level.
  auto rewrite = (dir / "again.csv").string();
  write_ir_csv(rewrite, back);
  CHECK(read_file(rewrite) == read_file(path));

  // Header sanity.
  auto first_line = read_file(path).substr(0, read_file(path).find('\n'));
  CHECK(first_line ==
        "post_id,comment_id,label_class,label_category,ir,ir_label,stage,"
        "position_ratio,elapsed_prev_s,p1,p2,p3,p4");

  atomic_write_file((dir / "bad.csv").string(), "who,what\n");
  CHECK_THROWS_AS(read_ir_csv((dir / "bad.csv").string(), 60), ParseError);
  atomic_write_file(
      (dir / "short.csv").string(),
      "post_id,comment_id,label_class,label_category,ir,ir_label,stage,"
      "position_ratio,elapsed_prev_s,p1\np,c,benign,,0.5,increase\n");
  CHECK_THROWS_AS(read_ir_csv((dir / "short.csv").string(), 60), ParseError);
  CHECK_THROWS_AS(read_ir_csv((dir / "absent.csv").string(), 60), Error);
  fs::remove_all(dir);
}

TEST_CASE("stage_cdf builds a per-class cumulative curve") {
  auto mk = [](const char* cls, double ratio) {
    IrRecord rec;
    rec.label.cls = *url_class_from_name(cls);
    rec.sample.position_ratio = ratio;
    return rec;
  };
  auto rows = stage_cdf({mk("benign", 0.9), mk("benign", 0.1),
                         mk("critical", 0.5), mk("benign", 0.4)});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].label_class == "benign");
  CHECK(rows[0].position_ratio == 0.1);
  CHECK(rows[0].cumulative_fraction == doctest::Approx(1.0 / 3.0));
  CHECK(rows[1].position_ratio == 0.4);
  CHECK(rows[1].cumulative_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(rows[2].position_ratio == 0.9);
  CHECK(rows[2].cumulative_fraction == doctest::Approx(1.0));
  CHECK(rows[3].label_class == "critical");
  CHECK(rows[3].cumulative_fraction == doctest::Approx(1.0));
}

TEST_CASE("direction and stage names round-trip") {
  for (auto d : {IrDirection::Increase, IrDirection::Decrease}) {
    CHECK(direction_from_name(direction_name(d)) == d);
  }
  for (auto s :
       {LifeStage::RapidGrowth, LifeStage::SlowDecay, LifeStage::Dormancy}) {
    CHECK(stage_from_name(stage_name(s)) == s);
  }
  CHECK_FALSE(direction_from_name("sideways").has_value());
  CHECK_FALSE(stage_from_name("rebirth").has_value());
}

}  // TEST_SUITE
