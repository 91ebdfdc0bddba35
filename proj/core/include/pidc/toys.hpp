#pragma once

#include <optional>
#include <span>
#include <string>

#include "pidc/distribution.hpp"
#include "pidc/pid.hpp"

namespace pidc {

// Small encodings with known representational complexity.
struct ToyCase {
  std::string name;
  std::string construction;
  double reference;  // published complexity
};

inline constexpr double toy_tolerance = 0.01;

std::span<const ToyCase> toy_cases();
const ToyCase& toy_case(const std::string& name);

// Exact (rational) joint distribution of the case.
JointDistribution toy_distribution(const std::string& name);

// Binary sources, exactly one active source per support point, and a
// bijection between target values and active sources.
bool is_one_hot(const JointDistribution& dist);

struct ToyResult {
  ToyCase toy;
  double complexity = 0;
  std::string method;  // "lattice" or "one-hot closed form"
  bool passed = false;
  std::optional<PidResult> pid;
  // Uniform coarse-graining of order d: [C~, d C~].
  std::optional<int> coarse_order;
  std::optional<double> coarse_lower;
  std::optional<double> coarse_upper;
};

ToyResult run_toy(const std::string& name, const AnalyzeOptions& options = {});

}  // namespace pidc
