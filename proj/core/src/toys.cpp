#include "pidc/toys.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "pidc/error.hpp"
#include "pidc/reduction.hpp"

namespace pidc {

namespace {

const std::array<ToyCase, 7> cases{{
    {"onehot4", "4 equiprobable labels, one-hot in 4 binary neurons", 1.00},
    {"paired-binary", "4 equiprobable labels; S1=S2=bit 0, S3=S4=bit 1", 1.21},
    {"binary16", "16 equiprobable labels, binary code in 4 neurons", 1.67},
    {"onehot16", "16 equiprobable labels, one-hot in 16 binary neurons", 1.00},
    {"xor8x2", "two uniform 8-level neurons; T = [S1 >= 4] xor [S2 >= 5]", 1.89},
    {"parity8x3", "three uniform 8-level neurons; T = parity of [Si >= 4]", 2.83},
    {"binary10", "10 equiprobable labels, binary code in 4 neurons", 1.46},
}};

JointDistribution uniform_labels(int labels, int n, auto code) {
  std::vector<ExactPoint> pts;
  for (int t = 0; t < labels; ++t) pts.push_back({t, code(t), Rational(1, labels)});
  return JointDistribution::from_exact_points(labels, std::vector<int>(n, 2), std::move(pts));
}

std::vector<int> bits(int t, int n) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = (t >> i) & 1;
  return s;
}

std::vector<int> one_hot(int t, int n) {
  std::vector<int> s(n, 0);
  s[t] = 1;
  return s;
}

JointDistribution thresholded(int neurons, const std::vector<int>& cuts) {
  std::vector<ExactPoint> pts;
  int total = 1;
  for (int i = 0; i < neurons; ++i) total *= 8;
  for (int code = 0; code < total; ++code) {
    std::vector<int> s(neurons);
    int parity = 0;
    for (int i = 0, rest = code; i < neurons; ++i, rest /= 8) {
      s[i] = rest % 8;
      parity ^= s[i] >= cuts[i] ? 1 : 0;
    }
    pts.push_back({parity, std::move(s), Rational(1, total)});
  }
  return JointDistribution::from_exact_points(2, std::vector<int>(neurons, 8), std::move(pts));
}

}  // namespace

std::span<const ToyCase> toy_cases() { return cases; }

const ToyCase& toy_case(const std::string& name) {
  for (const auto& c : cases) {
    if (c.name == name) return c;
  }
  std::string known;
  for (const auto& c : cases) known += (known.empty() ? "" : ", ") + c.name;
  fail(error_kind::invalid_argument, "unknown toy case '" + name + "' (known: " + known + ")");
}

JointDistribution toy_distribution(const std::string& name) {
  toy_case(name);
  if (name == "onehot4") return uniform_labels(4, 4, [](int t) { return one_hot(t, 4); });
  if (name == "paired-binary") {
    return uniform_labels(4, 4, [](int t) { return std::vector<int>{t & 1, t & 1, t >> 1, t >> 1}; });
  }
  if (name == "binary16") return uniform_labels(16, 4, [](int t) { return bits(t, 4); });
  if (name == "onehot16") return uniform_labels(16, 16, [](int t) { return one_hot(t, 16); });
  if (name == "xor8x2") return thresholded(2, {4, 5});
  if (name == "parity8x3") return thresholded(3, {4, 4, 4});
  return uniform_labels(10, 4, [](int t) { return bits(t, 4); });
}

bool is_one_hot(const JointDistribution& dist) {
  for (int k : dist.source_sizes()) {
    if (k > 2) return false;
  }
  std::map<int, int> active_of_target;
  std::map<int, int> target_of_active;
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    const auto s = dist.sources(k);
    if (std::count(s.begin(), s.end(), 1) != 1) return false;
    const int active = static_cast<int>(std::find(s.begin(), s.end(), 1) - s.begin());
    const int t = dist.target(k);
    if (active_of_target.emplace(t, active).first->second != active) return false;
    if (target_of_active.emplace(active, t).first->second != t) return false;
  }
  return static_cast<int>(target_of_active.size()) == dist.n();
}

ToyResult run_toy(const std::string& name, const AnalyzeOptions& options) {
  ToyResult result;
  result.toy = toy_case(name);
  const auto dist = toy_distribution(name);
  if (dist.n() <= options.max_sources) {
    result.pid = analyze(dist, options);
    result.complexity = result.pid->require_complexity();
    result.method = "lattice";
  } else {
    if (!is_one_hot(dist)) fail(error_kind::size_limit, "toy case exceeds the lattice limit and is not one-hot");
    result.complexity = 1.0;
    result.method = "one-hot closed form";
    const int d = dist.n() / 4;
    const auto report = reduce_coarse(dist, uniform_map(dist.n(), d), options);
    result.coarse_order = d;
    result.coarse_lower = report.lower_bound;
    result.coarse_upper = report.upper_bound;
  }
  result.passed = std::abs(result.complexity - result.toy.reference) <= toy_tolerance;
  return result;
}

}  // namespace pidc
