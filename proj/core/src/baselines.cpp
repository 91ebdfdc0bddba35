#include "pidc/baselines.hpp"

#include <bit>

#include "fixed_sum.hpp"
#include "pidc/error.hpp"

namespace pidc {

using detail::from_fixed;
using detail::to_fixed;
using detail::wide_int;

namespace {

double binomial(int n, int k) {
  double c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

DirectedDifferences directed_differences(const JointDistribution& dist) {
  const int n = dist.n();
  if (n < 1 || n > max_sources) fail(error_kind::size_limit, "directed differences support 1..16 sources");
  // Fixed-point sums of H(T | S_a) per subset size keep the result
  // independent of subset visiting order.
  std::vector<wide_int> sums(n + 1, 0);
  const std::uint32_t subsets = 1u << n;
  for (std::uint32_t m = 0; m < subsets; ++m) {
    sums[std::popcount(m)] += to_fixed(conditional_entropy(dist, IndexSet(m)));
  }
  std::vector<double> average(n + 1);
  for (int k = 0; k <= n; ++k) average[k] = from_fixed(sums[k]) / binomial(n, k);
  DirectedDifferences out;
  out.values.resize(n);
  for (int k = 1; k <= n; ++k) out.values[k - 1] = average[k - 1] - average[k];
  out.total_mi = average[0] - average[n];
  return out;
}

double reing_complexity(std::span<const double> differences, double total_mi, double tolerance) {
  if (!(total_mi > tolerance)) {
    fail(error_kind::undefined_complexity,
         "Reing complexity undefined: I(T:S) = " + std::to_string(total_mi) + " bits is not above the tolerance");
  }
  wide_int acc = 0;
  for (std::size_t k = 0; k < differences.size(); ++k) acc += to_fixed(differences[k]) * static_cast<int>(k + 1);
  return from_fixed(acc) / total_mi;
}

double reing_complexity(const DirectedDifferences& differences, double tolerance) {
  return reing_complexity(differences.values, differences.total_mi, tolerance);
}

Comparison compare(const JointDistribution& dist, const AnalyzeOptions& options) {
  const auto pid = analyze(dist, options);
  const auto dd = directed_differences(dist);
  Comparison out;
  out.total_mi = pid.total_mi;
  out.complexity = pid.complexity;
  out.backbone = pid.backbone;
  out.differences = dd.values;
  if (dd.total_mi > options.tolerance) out.reing_complexity = reing_complexity(dd, options.tolerance);
  return out;
}

}  // namespace pidc
