#include "cascadia/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cascadia/error.hpp"

namespace cascadia {

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  double cdf;
  if (x < 1.18) {
    // Theta-function form converges fast for small x.
    double s = 0.0;
    for (int j = 1;; ++j) {
      double e = (2 * j - 1) * M_PI / x;
      double term = std::exp(-e * e / 8.0);
      s += term;
      if (term < 1e-12) break;
    }
    cdf = std::sqrt(2.0 * M_PI) / x * s;
  } else {
    double s = 0.0;
    double sign = 1.0;
    for (int j = 1;; ++j) {
      double term = std::exp(-2.0 * j * j * x * x);
      s += sign * term;
      sign = -sign;
      if (term < 1e-12) break;
    }
    cdf = 1.0 - 2.0 * s;
  }
  double sf = 1.0 - cdf;
  return std::clamp(sf, 0.0, 1.0);
}

KsResult ks_two_sample(const std::vector<double>& a,
                       const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error("KS test needs non-empty samples");
  std::vector<double> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const std::size_t n1 = sa.size(), n2 = sb.size();
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < n1 && ib < n2) {
    double v = std::min(sa[ia], sb[ib]);
    while (ia < n1 && sa[ia] == v) ++ia;
    while (ib < n2 && sb[ib] == v) ++ib;
    double diff = std::abs(static_cast<double>(ia) / n1 -
                           static_cast<double>(ib) / n2);
    d = std::max(d, diff);
  }
  // Once a side is exhausted its ECDF is pinned at 1 and the remaining
  // values only close the gap, so the loop above has already seen the max.

  double en = static_cast<double>(n1) * static_cast<double>(n2) /
              (static_cast<double>(n1) + static_cast<double>(n2));
  KsResult r;
  r.d_statistic = d;
  r.p_value = kolmogorov_sf(std::sqrt(en) * d);
  r.n1 = n1;
  r.n2 = n2;
  return r;
}

SummaryStats summary_stats(const std::vector<double>& samples) {
  if (samples.empty()) throw Error("summary of empty sample");
  SummaryStats s;
  s.n = samples.size();
  double sum = 0.0;
  s.min = samples.front();
  s.max = samples.front();
  for (double v : samples) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : samples) {
      double dev = v - s.mean;
      ss += dev * dev;
    }
    s.dispersion = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::tuple<SummaryStats, SummaryStats, KsResult> compare_cascades(
    const std::vector<PostThread>& targets,
    const std::vector<PostThread>& nontargets, std::int64_t final_minutes) {
  if (targets.empty() || nontargets.empty()) {
    throw Error("cascade comparison needs threads on both sides");
  }
  auto finals = [&](const std::vector<PostThread>& threads) {
    std::vector<double> out;
    out.reserve(threads.size());
    for (const auto& t : threads) {
      out.push_back(
          static_cast<double>(final_comment_count(t, final_minutes)));
    }
    return out;
  };
  std::vector<double> ta = finals(targets);
  std::vector<double> tb = finals(nontargets);
  return {summary_stats(ta), summary_stats(tb), ks_two_sample(ta, tb)};
}

}  // namespace cascadia
