#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roadpop {

/// k classes separated by k-1 ascending interior breaks; a value's class is
/// the number of breaks <= it.
struct ClassBreaks {
  std::size_t k = 1;
  std::vector<double> breaks;

  std::size_t class_of(double v) const;
};

/// Fisher-Jenks optimal partition of the sorted values into k contiguous
/// classes, minimising the total within-class sum of squared deviations.
/// Equal values always share a class. Among equal-cost partitions the one
/// with smaller breaks is preferred. Throws std::invalid_argument when k is 0
/// or exceeds the number of distinct values.
ClassBreaks jenks_breaks(std::span<const double> values, std::size_t k);

std::size_t distinct_count(std::span<const double> values);

}  // namespace roadpop
