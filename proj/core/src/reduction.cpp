#include "pidc/reduction.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <numeric>
#include <random>

#include "pidc/error.hpp"

namespace pidc {

namespace {

constexpr double bound_slack = 1e-9;

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    int v = 0;
    const char* first = text.data() + pos;
    const char* last = text.data() + comma;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (first == last || ec != std::errc() || ptr != last) {
      fail(error_kind::parse, std::string("malformed ") + what + " '" + text + "'");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace

CoarseGrainMap CoarseGrainMap::from_assignment(std::vector<int> assignment) {
  if (assignment.empty()) fail(error_kind::invalid_argument, "coarse-grain map is empty");
  if (assignment.size() > static_cast<std::size_t>(max_sources)) {
    fail(error_kind::size_limit, "coarse-grain map covers more than " + std::to_string(max_sources) + " sources");
  }
  const int coarse = *std::max_element(assignment.begin(), assignment.end());
  CoarseGrainMap map;
  map.preimages_.assign(std::max(coarse, 0), IndexSet());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const int j = assignment[i];
    if (j < 1) fail(error_kind::invalid_argument, "coarse index " + std::to_string(j) + " is not positive");
    map.preimages_[j - 1] = IndexSet(map.preimages_[j - 1].mask() | (1u << i));
  }
  for (int j = 1; j <= coarse; ++j) {
    if (map.preimages_[j - 1].empty()) {
      fail(error_kind::invalid_argument, "coarse-grain map is not surjective: nothing maps to " + std::to_string(j));
    }
  }
  map.assignment_ = std::move(assignment);
  map.coarse_n_ = coarse;
  return map;
}

CoarseGrainMap CoarseGrainMap::parse(const std::string& text) {
  return from_assignment(parse_int_list(text, "coarse-grain map"));
}

IndexSet CoarseGrainMap::preimage(IndexSet coarse) const {
  std::uint32_t mask = 0;
  for (int j : coarse.members()) mask |= preimage(j).mask();
  return IndexSet(mask);
}

std::optional<int> CoarseGrainMap::uniform_order() const {
  const int d = preimages_.front().size();
  for (IndexSet block : preimages_) {
    if (block.size() != d) return std::nullopt;
  }
  return d;
}

std::string CoarseGrainMap::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(assignment_[i]);
  }
  return out;
}

CoarseGrainMap uniform_map(int n, int d) {
  if (n < 1 || d < 1) fail(error_kind::invalid_argument, "uniform map needs n >= 1 and d >= 1");
  if (n % d != 0) {
    fail(error_kind::invalid_argument, "order " + std::to_string(d) + " does not divide n=" + std::to_string(n));
  }
  std::vector<int> f(n);
  for (int i = 1; i <= n; ++i) f[i - 1] = (i - 1) / d + 1;
  return CoarseGrainMap::from_assignment(std::move(f));
}

CoarseGrainMap random_uniform_map(int n, int d, std::uint64_t seed) {
  const auto base = uniform_map(n, d);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> f(n);
  for (int pos = 0; pos < n; ++pos) f[order[pos] - 1] = base(pos + 1);
  return CoarseGrainMap::from_assignment(std::move(f));
}

JointDistribution coarse_grain(const JointDistribution& dist, const CoarseGrainMap& map) {
  if (map.n() != dist.n()) {
    fail(error_kind::invalid_argument, "coarse-grain map covers " + std::to_string(map.n()) +
                                           " sources, distribution has " + std::to_string(dist.n()));
  }
  const int coarse = map.coarse_n();
  std::vector<int> sizes(coarse);
  for (int j = 1; j <= coarse; ++j) {
    std::uint64_t product = 1;
    for (int i : map.preimage(j).members()) product *= static_cast<std::uint64_t>(dist.source_sizes()[i - 1]);
    if (product > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      fail(error_kind::size_limit, "coarse source " + std::to_string(j) + " alphabet is too large");
    }
    sizes[j - 1] = static_cast<int>(product);
  }
  auto coarse_state = [&](std::size_t k) {
    std::vector<int> s(coarse);
    for (int j = 1; j <= coarse; ++j) s[j - 1] = static_cast<int>(dist.source_code(k, map.preimage(j)));
    return s;
  };
  JointDistribution out = [&] {
    if (dist.exact()) {
      std::vector<ExactPoint> pts;
      for (std::size_t k = 0; k < dist.support_size(); ++k) {
        pts.push_back({dist.target(k), coarse_state(k), dist.exact_mass(k)});
      }
      return JointDistribution::from_exact_points(dist.target_size(), sizes, std::move(pts));
    }
    std::vector<WeightedPoint> pts;
    for (std::size_t k = 0; k < dist.support_size(); ++k) pts.push_back({dist.target(k), coarse_state(k), dist.mass(k)});
    return JointDistribution::from_points(dist.target_size(), sizes, std::move(pts));
  }();
  out.target_labels = dist.target_labels;
  return out;
}

std::vector<std::size_t> coarse_atom_targets(const RedundancyLattice& fine, const RedundancyLattice& coarse,
                                             const CoarseGrainMap& map) {
  if (fine.n() != map.n() || coarse.n() != map.coarse_n()) {
    fail(error_kind::invalid_argument, "lattices do not match the coarse-grain map");
  }
  const std::uint32_t coarse_subsets = 1u << coarse.n();
  std::vector<std::uint32_t> pre(coarse_subsets);
  for (std::uint32_t m = 0; m < coarse_subsets; ++m) pre[m] = map.preimage(IndexSet(m)).mask();
  std::vector<std::size_t> out(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const std::uint64_t phi = fine.parthood_mask(i);
    std::uint64_t coarse_phi = 0;
    for (std::uint32_t m = 0; m < coarse_subsets; ++m) coarse_phi |= ((phi >> pre[m]) & 1u) << m;
    const auto idx = coarse.find(coarse_phi);
    if (!idx) fail(error_kind::invariant, "coarse parthood of " + fine.antichain(i).to_string() + " is not valid");
    out[i] = *idx;
  }
  return out;
}

std::vector<double> aggregate_atoms(const RedundancyLattice& fine, std::span<const double> fine_atoms,
                                    const RedundancyLattice& coarse, const CoarseGrainMap& map) {
  if (fine_atoms.size() != fine.size()) fail(error_kind::invalid_argument, "atom vector does not match lattice");
  const auto targets = coarse_atom_targets(fine, coarse, map);
  std::vector<double> out(coarse.size(), 0.0);
  for (std::size_t i = 0; i < targets.size(); ++i) out[targets[i]] += fine_atoms[i];
  return out;
}

SubsampleResult subsample(const JointDistribution& dist, std::vector<int> indices) {
  if (indices.size() > static_cast<std::size_t>(default_max_sources)) {
    fail(error_kind::size_limit, "subsample selects " + std::to_string(indices.size()) + " sources; at most " +
                                     std::to_string(default_max_sources) + " allowed");
  }
  auto reduced = restrict_sources(dist, indices);
  return {std::move(reduced), std::move(indices)};
}

std::vector<int> random_indices(int n, int k, std::uint64_t seed) {
  if (k < 1 || k > n) fail(error_kind::invalid_argument, "cannot draw " + std::to_string(k) + " of " + std::to_string(n));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 1);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::string to_string(ReductionMode mode) {
  return mode == ReductionMode::subsample ? "subsample" : "coarse-grain";
}

ReductionReport reduce_coarse(const JointDistribution& dist, const CoarseGrainMap& map,
                              const AnalyzeOptions& options) {
  const auto reduced = analyze(coarse_grain(dist, map), options);
  ReductionReport report;
  report.mode = ReductionMode::coarse_grain;
  report.reduced_complexity = reduced.require_complexity();
  report.selection = map.assignment();
  report.order = map.uniform_order();
  if (report.order) {
    report.lower_bound = report.reduced_complexity;
    report.upper_bound = *report.order * report.reduced_complexity;
  }
  return report;
}

ReductionReport reduce_subsample(const JointDistribution& dist, const std::vector<int>& indices,
                                 const AnalyzeOptions& options) {
  const auto reduced = analyze(subsample(dist, indices).distribution, options);
  ReductionReport report;
  report.mode = ReductionMode::subsample;
  report.reduced_complexity = reduced.require_complexity();
  report.selection = indices;
  report.warning = subsample_warning;
  return report;
}

ReductionReport verify_bounds(const JointDistribution& dist, const CoarseGrainMap& map,
                              const AnalyzeOptions& options) {
  if (!map.uniform_order()) fail(error_kind::invalid_argument, "bounds are only established for uniform maps");
  ReductionReport report = reduce_coarse(dist, map, options);
  const double c = analyze(dist, options).require_complexity();
  report.full_complexity = c;
  report.bounds_hold = *report.lower_bound - bound_slack <= c && c <= *report.upper_bound + bound_slack;
  return report;
}

ReductionReport verify_bounds(const JointDistribution& dist, int d, const AnalyzeOptions& options) {
  return verify_bounds(dist, uniform_map(dist.n(), d), options);
}

}  // namespace pidc
