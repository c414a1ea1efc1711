#include "cascadia/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cascadia/error.hpp"
#include "cascadia/util.hpp"

namespace cascadia {

Dav compute_dav(const PostThread& thread, std::int64_t window_minutes,
                std::int64_t horizon_minutes) {
  if (window_minutes < 1 || horizon_minutes < 1) {
    throw Error("window and horizon must be positive");
  }
  if (horizon_minutes % window_minutes != 0) {
    throw Error("horizon must be a multiple of the window");
  }
  Dav dav;
  dav.window_minutes = window_minutes;
  std::int64_t windows = horizon_minutes / window_minutes;
  dav.values.reserve(windows);
  for (std::int64_t i = 1; i <= windows; ++i) {
    dav.values.push_back(acc_n_comment(thread, i, window_minutes));
  }
  return dav;
}

DistributionMatrix build_distribution_matrix(
    const std::vector<PostThread>& threads, std::int64_t window_minutes,
    std::int64_t horizon_minutes, std::int64_t final_minutes) {
  if (final_minutes != kFinalAllMinutes && final_minutes < horizon_minutes) {
    throw Error("final time must not precede the horizon");
  }
  DistributionMatrix d;
  d.window_minutes = window_minutes;
  d.horizon_minutes = horizon_minutes;
  if (horizon_minutes % window_minutes != 0) {
    throw Error("horizon must be a multiple of the window");
  }
  std::int64_t windows = horizon_minutes / window_minutes;
  for (const auto& t : threads) {
    std::int64_t final_count = final_comment_count(t, final_minutes);
    for (std::int64_t i = 1; i <= windows; ++i) {
      std::int64_t j = n_comment(t, i * window_minutes);
      d.cells[{i, j}].push_back(final_count);
    }
  }
  return d;
}

std::int64_t bootstrap_lower_bound(const std::vector<std::int64_t>& samples,
                                   std::int64_t resamples, double percentile,
                                   std::uint64_t seed) {
  if (samples.empty()) throw Error("bootstrap over an empty cell");
  if (resamples < 1) throw Error("resample count must be positive");
  if (percentile <= 0.0 || percentile >= 100.0) {
    throw Error("percentile must lie in (0, 100)");
  }
  const std::size_t n = samples.size();
  Rng rng(seed);
  std::vector<std::int64_t> minima;
  minima.reserve(resamples);
  for (std::int64_t b = 0; b < resamples; ++b) {
    std::int64_t lo = samples[rng.next_below(n)];
    for (std::size_t k = 1; k < n; ++k) {
      lo = std::min(lo, samples[rng.next_below(n)]);
    }
    minima.push_back(lo);
  }
  std::sort(minima.begin(), minima.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(resamples)));
  rank = std::clamp<std::size_t>(rank, 1, minima.size());
  return minima[rank - 1];
}

PredictionMatrix build_prediction_matrix(const DistributionMatrix& d,
                                         std::int64_t resamples,
                                         double percentile, std::uint64_t seed,
                                         int threads) {
  PredictionMatrix m;
  m.window_minutes = d.window_minutes;
  m.horizon_minutes = d.horizon_minutes;
  m.resamples = resamples;
  m.percentile = percentile;
  m.seed = seed;

  std::vector<const std::pair<const std::pair<std::int64_t, std::int64_t>,
                              std::vector<std::int64_t>>*>
      cells;
  cells.reserve(d.cells.size());
  for (const auto& cell : d.cells) cells.push_back(&cell);
  std::vector<std::int64_t> bounds(cells.size());

  parallel_for(cells.size(), static_cast<unsigned>(std::max(threads, 1)),
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto& [key, samples] = *cells[idx];
      std::uint64_t cell_seed =
          mix_seed(seed, static_cast<std::uint64_t>(key.first),
                   static_cast<std::uint64_t>(key.second));
      bounds[idx] = bootstrap_lower_bound(samples, resamples, percentile,
                                          cell_seed);
    }
  });
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    m.cells[cells[idx]->first] = bounds[idx];
  }
  return m;
}

std::optional<std::int64_t> predict_final(
    const PredictionMatrix& m, std::int64_t observed_minutes,
    std::int64_t observed_comment_count) {
  if (observed_minutes < 1 || observed_minutes % m.window_minutes != 0) {
    throw Error("observation time must align to a window boundary");
  }
  auto it = m.cells.find(
      {observed_minutes / m.window_minutes, observed_comment_count});
  if (it == m.cells.end()) return std::nullopt;
  return it->second;
}

CascadeCV cross_validate(const std::vector<PostThread>& train,
                         const std::vector<PostThread>& test,
                         std::int64_t window_minutes,
                         std::int64_t horizon_minutes,
                         std::int64_t final_minutes, std::int64_t resamples,
                         double percentile, std::uint64_t seed, int threads) {
  DistributionMatrix d = build_distribution_matrix(
      train, window_minutes, horizon_minutes, final_minutes);
  PredictionMatrix m =
      build_prediction_matrix(d, resamples, percentile, seed, threads);
  CascadeCV cv;
  cv.total = static_cast<std::int64_t>(test.size());
  for (const auto& t : test) {
    std::int64_t observed = n_comment(t, horizon_minutes);
    auto bound = predict_final(m, horizon_minutes, observed);
    if (!bound) continue;
    ++cv.predictable;
    if (final_comment_count(t, final_minutes) >= *bound) ++cv.precision_hits;
  }
  return cv;
}

void write_prediction_matrix(const PredictionMatrix& m,
                             const std::string& path) {
  std::ostringstream csv;
  csv << "i,j,bound\n";
  for (const auto& [key, bound] : m.cells) {
    csv << key.first << ',' << key.second << ',' << bound << '\n';
  }
  atomic_write_file(path, csv.str());

  std::ostringstream meta;
  meta << "window_minutes = " << m.window_minutes << '\n'
       << "horizon_minutes = " << m.horizon_minutes << '\n'
       << "resamples = " << m.resamples << '\n'
       << "percentile = " << format_num(m.percentile) << '\n'
       << "seed = " << m.seed << '\n';
  atomic_write_file(path + ".meta", meta.str());
}

PredictionMatrix read_prediction_matrix(const std::string& path) {
  PredictionMatrix m;
  std::ifstream meta(path + ".meta");
  if (!meta) throw Error("cannot open matrix metadata: " + path + ".meta");
  std::string line;
  while (std::getline(meta, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "window_minutes") m.window_minutes = std::stoll(value);
      else if (key == "horizon_minutes") m.horizon_minutes = std::stoll(value);
      else if (key == "resamples") m.resamples = std::stoll(value);
      else if (key == "percentile") m.percentile = std::stod(value);
      else if (key == "seed") m.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw Error("bad matrix metadata line: " + line);
    }
  }

  std::ifstream csv(path);
  if (!csv) throw Error("cannot open matrix file: " + path);
  std::size_t line_no = 0;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line_no == 1) {
      if (trim(line) != "i,j,bound") {
        throw ParseError("unexpected matrix header", line_no);
      }
      continue;
    }
    if (trim(line).empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != 3) throw ParseError("expected 3 columns", line_no);
    try {
      m.cells[{std::stoll(fields[0]), std::stoll(fields[1])}] =
          std::stoll(fields[2]);
    } catch (const std::exception&) {
      throw ParseError("non-numeric matrix cell", line_no);
    }
  }
  return m;
}

}  // namespace cascadia
