#include "roadpop/classify.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace roadpop {

std::size_t ClassBreaks::class_of(double v) const {
  return static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), v) - breaks.begin());
}

std::size_t distinct_count(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

ClassBreaks jenks_breaks(std::span<const double> values, std::size_t k) {
  if (k == 0) throw std::invalid_argument("jenks_breaks: k must be >= 1");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  // Collapse runs of equal values into weighted points.
  std::vector<double> distinct;
  std::vector<double> weight;
  for (double v : sorted) {
    if (distinct.empty() || v != distinct.back()) {
      distinct.push_back(v);
      weight.push_back(1.0);
    } else {
      weight.back() += 1.0;
    }
  }
  const std::size_t m = distinct.size();
  if (k > m) throw std::invalid_argument("jenks_breaks: more classes than distinct values");

  ClassBreaks out;
  out.k = k;
  if (k == 1) return out;

  std::vector<double> w(m + 1, 0.0), s1(m + 1, 0.0), s2(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    w[i + 1] = w[i] + weight[i];
    s1[i + 1] = s1[i] + weight[i] * distinct[i];
    s2[i + 1] = s2[i] + weight[i] * distinct[i] * distinct[i];
  }
  // Sum of squared deviations of distinct[i, j) with multiplicities.
  const auto ssd = [&](std::size_t i, std::size_t j) {
    const double n = w[j] - w[i];
    const double a = s1[j] - s1[i];
    const double b = s2[j] - s2[i];
    return std::max(0.0, (n * b - a * a) / n);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // cost[c][j]: best cost of putting distinct[0, j) into c+1 classes.
  std::vector<std::vector<double>> cost(k, std::vector<double>(m + 1, inf));
  std::vector<std::vector<std::size_t>> start(k, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t j = 1; j <= m; ++j) cost[0][j] = ssd(0, j);
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t j = c + 1; j <= m; ++j) {
      for (std::size_t i = c; i < j; ++i) {
        const double v = cost[c - 1][i] + ssd(i, j);
        if (v < cost[c][j]) {
          cost[c][j] = v;
          start[c][j] = i;
        }
      }
    }
  }

  out.breaks.assign(k - 1, 0.0);
  std::size_t j = m;
  for (std::size_t c = k - 1; c >= 1; --c) {
    const std::size_t i = start[c][j];
    out.breaks[c - 1] = distinct[i];
    j = i;
  }
  return out;
}

}  // namespace roadpop
