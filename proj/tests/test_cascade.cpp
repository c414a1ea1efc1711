#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <vector>

#include "cascadia/cascade.hpp"
#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

using namespace cascadia;

namespace {

PostThread thread_from_minutes(const std::string& id,
                               const std::vector<std::int64_t>& minutes) {
  PostThread t;
  t.post_id = id;
  t.page_id = "g";
  t.created_at = 1000;
  int n = 0;
  for (auto m : minutes) {
    Activity a;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "c%03d", n++);
    a.activity_id = id + "_" + buf;
    a.kind = ActivityKind::Comment;
    a.actor_id = "u";
    a.timestamp = t.created_at + m * 60;
    a.text = "t";
    t.activities.push_back(std::move(a));
  }
  std::sort(t.activities.begin(), t.activities.end(),
            [](const Activity& x, const Activity& y) {
              if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
              return x.activity_id < y.activity_id;
            });
  return t;
}

std::vector<PostThread> random_corpus(std::uint64_t seed, std::size_t count) {
  Rng rng(seed);
  std::vector<PostThread> threads;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::int64_t> minutes;
    std::size_t n = rng.next_below(40);
    for (std::size_t k = 0; k < n; ++k) {
      minutes.push_back(static_cast<std::int64_t>(rng.next_below(1440)));
    }
    threads.push_back(
        thread_from_minutes("p" + std::to_string(i), minutes));
  }
  return threads;
}

// Every ordered resample of {2,4,9} enumerated outright; nearest-rank
// percentile of the 27 minima.
std::int64_t exhaustive_bootstrap_oracle(double percentile) {
  const std::int64_t s[3] = {2, 4, 9};
  std::vector<std::int64_t> minima;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        minima.push_back(std::min({s[i], s[j], s[k]}));
  std::sort(minima.begin(), minima.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(minima.size())));
  return minima[rank - 1];
}

}  // namespace

TEST_SUITE("cascade") {

TEST_CASE("compute_dav windows the comment counts") {
  auto empty = compute_dav(thread_from_minutes("e", {}), 5, 120);
  CHECK(empty.values == std::vector<std::int64_t>(24, 0));

  auto dav = compute_dav(thread_from_minutes("t", {1, 2, 7}), 5, 15);
  CHECK(dav.values == std::vector<std::int64_t>{2, 1, 0});
  CHECK(dav.window_minutes == 5);

  CHECK_THROWS_AS(compute_dav(thread_from_minutes("t", {}), 5, 17), Error);
  CHECK_THROWS_AS(compute_dav(thread_from_minutes("t", {}), 0, 10), Error);
}

TEST_CASE("dav values telescope to the horizon count") {
  for (const auto& t : random_corpus(61, 40)) {
    auto dav = compute_dav(t, 5, 120);
    auto sum = std::accumulate(dav.values.begin(), dav.values.end(),
                               std::int64_t{0});
    REQUIRE(sum == n_comment(t, 120));
  }
}

TEST_CASE("distribution matrix stores one entry per thread per window") {
  auto single = build_distribution_matrix(
      {thread_from_minutes("t", {1, 2, 3, 40, 50, 60, 70, 80, 90, 100})}, 5, 5,
      kFinalAllMinutes);
  REQUIRE(single.cells.size() == 1);
  REQUIRE(single.cells.count({1, 3}) == 1);
  CHECK(single.cells.at({1, 3}) == std::vector<std::int64_t>{10});

  auto corpus = random_corpus(62, 200);
  auto d = build_distribution_matrix(corpus, 5, 120, kFinalAllMinutes);
  std::size_t cardinality = 0;
  for (const auto& [key, finals] : d.cells) {
    cardinality += finals.size();
    for (auto f : finals) REQUIRE(f >= key.second);  // finals cannot shrink
    REQUIRE(key.first >= 1);
    REQUIRE(key.first <= 24);
  }
  CHECK(cardinality == 200 * 24);

  CHECK(build_distribution_matrix({}, 5, 120, kFinalAllMinutes).cells.empty());
  CHECK_THROWS_AS(build_distribution_matrix(corpus, 5, 120, 60), Error);
}

TEST_CASE("bootstrap_lower_bound degenerate cells") {
  CHECK(bootstrap_lower_bound({100}, 500, 50.0, 1) == 100);
  CHECK(bootstrap_lower_bound({7, 7, 7, 7}, 1000, 25.0, 2) == 7);
  CHECK(bootstrap_lower_bound({7, 7, 7, 7}, 3, 99.9, 3) == 7);

  CHECK_THROWS_AS(bootstrap_lower_bound({}, 100, 50.0, 1), Error);
  CHECK_THROWS_AS(bootstrap_lower_bound({1}, 0, 50.0, 1), Error);
  CHECK_THROWS_AS(bootstrap_lower_bound({1}, 100, 0.0, 1), Error);
  CHECK_THROWS_AS(bootstrap_lower_bound({1}, 100, 100.0, 1), Error);
}

TEST_CASE("bootstrap_lower_bound matches the exhaustive resample oracle") {
  // With {2,4,9}, 19 of the 27 equally likely resamples have minimum 2,
  // 7 have minimum 4, and 1 has minimum 9; large B pins the percentiles.
  CHECK(exhaustive_bootstrap_oracle(50.0) == 2);
  CHECK(exhaustive_bootstrap_oracle(90.0) == 4);

  for (std::uint64_t seed : {1ull, 42ull, 999ull, 123456789ull}) {
    CHECK(bootstrap_lower_bound({2, 4, 9}, 2000, 50.0, seed) ==
          exhaustive_bootstrap_oracle(50.0));
    CHECK(bootstrap_lower_bound({2, 4, 9}, 2000, 90.0, seed) ==
          exhaustive_bootstrap_oracle(90.0));
  }
}

TEST_CASE("bootstrap bounds stay within the sample range") {
  Rng rng(63);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::int64_t> samples(1 + rng.next_below(30));
    for (auto& s : samples) {
      s = static_cast<std::int64_t>(rng.next_below(500));
    }
    auto lo = *std::min_element(samples.begin(), samples.end());
    auto hi = *std::max_element(samples.begin(), samples.end());
    auto bound = bootstrap_lower_bound(samples, 200, 50.0, iter);
    REQUIRE(bound >= lo);
    REQUIRE(bound <= hi);
  }
}

TEST_CASE("prediction matrix preserves keys and is seed-deterministic") {
  auto corpus = random_corpus(64, 120);
  auto d = build_distribution_matrix(corpus, 5, 120, kFinalAllMinutes);

  auto m1 = build_prediction_matrix(d, 300, 50.0, 77, 1);
  CHECK(m1.cells.size() == d.cells.size());
  for (const auto& [key, bound] : m1.cells) {
    const auto& samples = d.cells.at(key);
    REQUIRE(bound >= *std::min_element(samples.begin(), samples.end()));
    REQUIRE(bound <= *std::max_element(samples.begin(), samples.end()));
  }

  // Identical regardless of worker count, and repeatable.
  for (int threads : {1, 2, 3, 8}) {
    auto m = build_prediction_matrix(d, 300, 50.0, 77, threads);
    REQUIRE(m.cells == m1.cells);
  }
  CHECK(build_prediction_matrix(d, 300, 50.0, 77, 4).cells == m1.cells);
}

TEST_CASE("predict_final looks up exact cells only") {
  PredictionMatrix m;
  m.window_minutes = 5;
  m.horizon_minutes = 120;
  m.cells[{5, 5}] = 100;

  CHECK(predict_final(m, 25, 5) == 100);
  CHECK_FALSE(predict_final(m, 25, 6).has_value());
  CHECK_FALSE(predict_final(m, 30, 5).has_value());
  CHECK_THROWS_AS(predict_final(m, 7, 5), Error);
  CHECK_THROWS_AS(predict_final(m, 0, 5), Error);

  PredictionMatrix empty;
  CHECK_FALSE(predict_final(empty, 5, 0).has_value());
}

TEST_CASE("cross_validate self-consistency and unpredictables") {
  auto t = thread_from_minutes("t", {1, 2, 3, 200, 300});
  auto cv = cross_validate({t}, {t}, 5, 120, kFinalAllMinutes, 200, 50.0, 1);
  CHECK(cv.total == 1);
  CHECK(cv.predictable == 1);
  CHECK(cv.precision_hits == 1);

  // Test thread with an observed count the training corpus never reaches.
  auto busy = thread_from_minutes(
      "busy", std::vector<std::int64_t>(50, 10));  // 50 comments by min 120
  auto cv2 =
      cross_validate({t}, {busy}, 5, 120, kFinalAllMinutes, 200, 50.0, 1);
  CHECK(cv2.total == 1);
  CHECK(cv2.predictable == 0);
  CHECK(cv2.precision_hits == 0);
}

TEST_CASE("cross_validate agrees with an independent scripted pass") {
  auto corpus = random_corpus(65, 160);
  std::vector<PostThread> train(corpus.begin(), corpus.begin() + 80);
  std::vector<PostThread> test(corpus.begin() + 80, corpus.end());

  auto cv = cross_validate(train, test, 5, 120, kFinalAllMinutes, 250, 50.0,
                           99, 3);

  // Recount: rebuild the matrix and walk the test set by hand.
  auto m = build_prediction_matrix(
      build_distribution_matrix(train, 5, 120, kFinalAllMinutes), 250, 50.0,
      99, 1);
  std::int64_t predictable = 0, hits = 0;
  for (const auto& t : test) {
    auto it = m.cells.find({24, n_comment(t, 120)});
    if (it == m.cells.end()) continue;
    ++predictable;
    if (final_comment_count(t, kFinalAllMinutes) >= it->second) ++hits;
  }
  CHECK(cv.total == 80);
  CHECK(cv.predictable == predictable);
  CHECK(cv.precision_hits == hits);
  CHECK(cv.precision_hits <= cv.predictable);
  CHECK(cv.predictable <= cv.total);

  // Deterministic under a fixed seed.
  auto again = cross_validate(train, test, 5, 120, kFinalAllMinutes, 250,
                              50.0, 99, 1);
  CHECK(again.precision_hits == cv.precision_hits);
  CHECK(again.predictable == cv.predictable);
}

TEST_CASE("prediction matrix file round-trip") {
  auto corpus = random_corpus(66, 60);
  auto m = build_prediction_matrix(
      build_distribution_matrix(corpus, 5, 60, kFinalAllMinutes), 100, 75.0,
      31337, 2);

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "cascadia_cascade_io";
  fs::remove_all(dir);
  auto path = (dir / "matrix.csv").string();
  write_prediction_matrix(m, path);

  auto back = read_prediction_matrix(path);
  CHECK(back.window_minutes == m.window_minutes);
  CHECK(back.horizon_minutes == m.horizon_minutes);
  CHECK(back.resamples == m.resamples);
  CHECK(back.percentile == m.percentile);
  CHECK(back.seed == m.seed);
  CHECK(back.cells == m.cells);

  CHECK_THROWS_AS(read_prediction_matrix((dir / "nothing.csv").string()),
                  Error);
  atomic_write_file((dir / "bad.csv").string(), "wrong,header\n1,2,3\n");
  atomic_write_file((dir / "bad.csv.meta").string(), "window_minutes = 5\n");
  CHECK_THROWS_AS(read_prediction_matrix((dir / "bad.csv").string()),
                  ParseError);
  fs::remove_all(dir);
}

}  // TEST_SUITE
