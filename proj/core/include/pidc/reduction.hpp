#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pidc/distribution.hpp"
#include "pidc/pid.hpp"

namespace pidc {

// Surjective f: {1..n} -> {1..n~}; all indices are 1-based.
class CoarseGrainMap {
 public:
  static CoarseGrainMap from_assignment(std::vector<int> assignment);
  // "1,1,2,2"
  static CoarseGrainMap parse(const std::string& text);

  int n() const { return static_cast<int>(assignment_.size()); }
  int coarse_n() const { return coarse_n_; }
  int operator()(int i) const { return assignment_.at(i - 1); }
  const std::vector<int>& assignment() const { return assignment_; }
  IndexSet preimage(int j) const { return preimages_.at(j - 1); }
  // f^-1[a~] for a set of coarse indices.
  IndexSet preimage(IndexSet coarse) const;
  // Order d when every block has the same size d.
  std::optional<int> uniform_order() const;
  std::string to_string() const;

 private:
  std::vector<int> assignment_;
  std::vector<IndexSet> preimages_;
  int coarse_n_ = 0;
};

// f(i) = floor((i-1)/d) + 1.
CoarseGrainMap uniform_map(int n, int d);
// Seeded shuffle of 1..n cut into consecutive blocks of d.
CoarseGrainMap random_uniform_map(int n, int d, std::uint64_t seed);

// S~_j is the tuple of sources in f^-1[{j}], coded mixed-radix in increasing
// index order.  Masses are carried over unchanged (exact when the input is).
JointDistribution coarse_grain(const JointDistribution& dist, const CoarseGrainMap& map);

// Phi~ = Phi o f^-1: the coarse lattice index each fine atom aggregates into.
std::vector<std::size_t> coarse_atom_targets(const RedundancyLattice& fine, const RedundancyLattice& coarse,
                                             const CoarseGrainMap& map);
// Sum of fine atoms per coarse antichain.
std::vector<double> aggregate_atoms(const RedundancyLattice& fine, std::span<const double> fine_atoms,
                                    const RedundancyLattice& coarse, const CoarseGrainMap& map);

struct SubsampleResult {
  JointDistribution distribution;
  std::vector<int> indices;
};

SubsampleResult subsample(const JointDistribution& dist, std::vector<int> indices);
// k distinct indices drawn by seeded shuffle, reported in ascending order.
std::vector<int> random_indices(int n, int k, std::uint64_t seed);

inline constexpr const char* subsample_warning =
    "subsampled complexity does not bound the complexity of the full representation";

enum class ReductionMode { subsample, coarse_grain };
std::string to_string(ReductionMode mode);

struct ReductionReport {
  ReductionMode mode = ReductionMode::coarse_grain;
  double reduced_complexity = 0;
  // Uniform coarse maps of order d: the true C lies in [C~, d C~].
  std::optional<int> order;
  std::optional<double> lower_bound;
  std::optional<double> upper_bound;
  std::optional<double> full_complexity;
  std::optional<bool> bounds_hold;
  std::vector<int> selection;  // map assignment or selected indices
  std::optional<std::uint64_t> seed;
  std::optional<std::string> warning;
};

ReductionReport reduce_coarse(const JointDistribution& dist, const CoarseGrainMap& map,
                              const AnalyzeOptions& options = {});
ReductionReport reduce_subsample(const JointDistribution& dist, const std::vector<int>& indices,
                                 const AnalyzeOptions& options = {});

// Computes both C and C~ for a uniform map of order d and checks
// C~ - 1e-9 <= C <= d C~ + 1e-9.
ReductionReport verify_bounds(const JointDistribution& dist, int d, const AnalyzeOptions& options = {});
ReductionReport verify_bounds(const JointDistribution& dist, const CoarseGrainMap& map,
                              const AnalyzeOptions& options = {});

}  // namespace pidc
