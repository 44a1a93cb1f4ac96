#include "factorbt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace factorbt::stats {

double mean(std::span<const double> x) {
  if (x.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  if (x.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double population_stddev(std::span<const double> x, double mean) {
  double ss = 0.0;
  for (double v : x) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(x.size()));
}

double sample_stddev(std::span<const double> x) {
  if (x.size() < 2) {
    return 0.0;
  }
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<double> midranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) {
      ++j;
    }
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      ranks[order[k]] = avg;
    }
    i = j;
  }
  return ranks;
}

}  // namespace factorbt::stats
