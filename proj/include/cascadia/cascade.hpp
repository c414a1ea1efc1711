#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cascadia/ingest.hpp"

namespace cascadia {

struct Dav {
  std::int64_t window_minutes = 5;
  std::vector<std::int64_t> values;  // values[i-1] = comments gained in window i
};

// (window index, cumulative comment count) -> final counts of matching posts.
struct DistributionMatrix {
  std::int64_t window_minutes = 5;
  std::int64_t horizon_minutes = 120;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::int64_t>>
      cells;
};

struct PredictionMatrix {
  std::int64_t window_minutes = 5;
  std::int64_t horizon_minutes = 120;
  std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> cells;
  // provenance
  std::int64_t resamples = 1000;
  double percentile = 50.0;
  std::uint64_t seed = 0;
};

struct CascadeCV {
  std::int64_t precision_hits = 0;
  std::int64_t predictable = 0;
  std::int64_t total = 0;
};

Dav compute_dav(const PostThread& thread, std::int64_t window_minutes,
                std::int64_t horizon_minutes);

DistributionMatrix build_distribution_matrix(
    const std::vector<PostThread>& threads, std::int64_t window_minutes,
    std::int64_t horizon_minutes, std::int64_t final_minutes);

// Percentile (nearest rank) of the minima of `resamples` with-replacement
// resamples of `samples`.
std::int64_t bootstrap_lower_bound(const std::vector<std::int64_t>& samples,
                                   std::int64_t resamples, double percentile,
                                   std::uint64_t seed);

// One bound per non-empty cell; each cell gets a seed derived from its key
// so results do not depend on evaluation order or thread count.
PredictionMatrix build_prediction_matrix(const DistributionMatrix& d,
                                         std::int64_t resamples,
                                         double percentile, std::uint64_t seed,
                                         int threads = 1);

// Lower bound at (observed_minutes / window, count), or absent when the
// training data never produced that cell.
std::optional<std::int64_t> predict_final(const PredictionMatrix& m,
                                          std::int64_t observed_minutes,
                                          std::int64_t observed_comment_count);

// Train a matrix, then query every test thread at the horizon boundary and
// score predictable / bound-satisfied counts.
CascadeCV cross_validate(const std::vector<PostThread>& train,
                         const std::vector<PostThread>& test,
                         std::int64_t window_minutes,
                         std::int64_t horizon_minutes,
                         std::int64_t final_minutes, std::int64_t resamples,
                         double percentile, std::uint64_t seed,
                         int threads = 1);

// CSV "i,j,bound" plus a key = value sidecar at path + ".meta".
void write_prediction_matrix(const PredictionMatrix& m,
                             const std::string& path);
PredictionMatrix read_prediction_matrix(const std::string& path);

}  // namespace cascadia
