#pragma once

#include <map>
#include <vector>

#include "pidc/distribution.hpp"
#include "pidc/pid.hpp"

namespace pidc {

// Directed local differences C_T(k-1 || k) for k = 1..n: the drop in the
// average conditional entropy H(T | S_a) from subsets of size k-1 to size k.
struct DirectedDifferences {
  std::vector<double> values;  // values[k-1] = C_T(k-1 || k)
  double total_mi = 0;
};

DirectedDifferences directed_differences(const JointDistribution& dist);

// C_Reing = (1/I) sum_k k C_T(k-1 || k); throws undefined_complexity when I <= tolerance.
double reing_complexity(const DirectedDifferences& differences, double tolerance = default_mi_tolerance);
double reing_complexity(std::span<const double> differences, double total_mi,
                        double tolerance = default_mi_tolerance);

struct Comparison {
  double total_mi = 0;
  std::optional<double> complexity;
  std::optional<double> reing_complexity;
  std::map<int, double> backbone;
  std::vector<double> differences;
};

Comparison compare(const JointDistribution& dist, const AnalyzeOptions& options = {});

}  // namespace pidc
