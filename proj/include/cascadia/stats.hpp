#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "cascadia/ingest.hpp"

namespace cascadia {

struct KsResult {
  double d_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double dispersion = 0.0;  // sample standard deviation; 0 when n == 1
  double min = 0.0;
  double max = 0.0;
};

// Exact supremum ECDF distance (ties handled) with the asymptotic
// Kolmogorov p-value at effective size n1*n2/(n1+n2).
KsResult ks_two_sample(const std::vector<double>& a,
                       const std::vector<double>& b);

// Survival function of the Kolmogorov distribution, Q(x) = P(K > x).
// Exposed for oracle comparison in tests.
double kolmogorov_sf(double x);

SummaryStats summary_stats(const std::vector<double>& samples);

// Final comment counts of each side summarized and KS-compared.
std::tuple<SummaryStats, SummaryStats, KsResult> compare_cascades(
    const std::vector<PostThread>& targets,
    const std::vector<PostThread>& nontargets, std::int64_t final_minutes);

}  // namespace cascadia
