#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pidc {

// Largest source count for which the redundancy lattice can be enumerated.
inline constexpr int max_lattice_sources = 6;
// Largest source count a distribution may carry (index sets are 32-bit masks).
inline constexpr int max_sources = 16;

// A set of 1-based source indices packed as a bitmask (bit i-1 <=> index i).
class IndexSet {
 public:
  constexpr IndexSet() = default;
  constexpr explicit IndexSet(std::uint32_t mask) : mask_(mask) {}

  static IndexSet of(std::initializer_list<int> one_based);
  static IndexSet of(std::span<const int> one_based);
  static constexpr IndexSet full(int n) { return IndexSet((n >= 32) ? ~0u : ((1u << n) - 1u)); }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  int size() const;
  constexpr bool contains(int one_based) const { return (mask_ >> (one_based - 1)) & 1u; }
  constexpr bool subset_of(IndexSet other) const { return (mask_ & ~other.mask_) == 0; }
  // Highest member index, 0 for the empty set.
  int max_member() const;

  std::vector<int> members() const;
  // "1,2,3"
  std::string to_string() const;

  friend constexpr bool operator==(IndexSet, IndexSet) = default;

 private:
  std::uint32_t mask_ = 0;
};

// Canonical order on index sets: by size, then lexicographically on the
// ascending member lists.
bool canonical_less(IndexSet a, IndexSet b);

// All nonempty subsets of {1..n} in canonical order.
std::vector<IndexSet> canonical_subsets(int n);

// A nonempty set of pairwise incomparable, nonempty index sets, stored in
// canonical order.
class Antichain {
 public:
  static Antichain from_sets(std::vector<IndexSet> sets, int n);
  // Parses the "{1}{2,3}" form.
  static Antichain parse(std::string_view text, int n);

  int n() const { return n_; }
  std::span<const IndexSet> elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  std::string to_string() const;

  friend bool operator==(const Antichain&, const Antichain&) = default;

 private:
  Antichain(int n, std::vector<IndexSet> elements) : n_(n), elements_(std::move(elements)) {}

  int n_ = 0;
  std::vector<IndexSet> elements_;
};

// alpha <= beta on the redundancy lattice: every b in beta contains some a in alpha.
bool lattice_leq(const Antichain& alpha, const Antichain& beta);

// Monotone boolean function over subsets of {1..n}, bit `s` holds Phi(s)
// for the subset with mask s (so n <= 6 fits in 64 bits).
class ParthoodDistribution {
 public:
  static ParthoodDistribution from_mask(int n, std::uint64_t values);

  int n() const { return n_; }
  std::uint64_t mask() const { return values_; }
  bool operator()(IndexSet a) const { return (values_ >> a.mask()) & 1u; }

  friend bool operator==(const ParthoodDistribution&, const ParthoodDistribution&) = default;

 private:
  ParthoodDistribution(int n, std::uint64_t values) : n_(n), values_(values) {}

  int n_ = 0;
  std::uint64_t values_ = 0;
};

ParthoodDistribution antichain_to_parthood(const Antichain& alpha, int n);
Antichain parthood_to_antichain(const ParthoodDistribution& phi);

// Bits of all supersets of `a` within {1..n}.
std::uint64_t upset_mask(IndexSet a, int n);

struct LatticeOptions {
  bool allow_large = false;  // required for n = 6
  bool build_order = true;   // strict-predecessor lists; refused for n = 6
};

// Rough resident size of an enumerated lattice including its order lists.
std::size_t estimate_lattice_bytes(int n, bool with_order);

class RedundancyLattice {
 public:
  static RedundancyLattice enumerate(int n, const LatticeOptions& options = {});

  int n() const { return n_; }
  std::size_t size() const { return parthood_.size(); }

  std::uint64_t parthood_mask(std::size_t i) const { return parthood_[i]; }
  Antichain antichain(std::size_t i) const;
  int degree_of_synergy(std::size_t i) const { return degree_[i]; }
  int cardinality(std::size_t i) const { return cardinality_[i]; }

  // Index lookup through the parthood mask.
  std::optional<std::size_t> find(std::uint64_t parthood_mask) const;
  std::optional<std::size_t> find(const Antichain& alpha) const;
  std::size_t singleton(IndexSet a) const;  // index of {a}
  std::size_t top() const { return singleton(IndexSet::full(n_)); }

  bool leq(std::size_t i, std::size_t j) const { return (parthood_[j] & ~parthood_[i]) == 0; }

  bool has_order() const { return !pred_offsets_.empty(); }
  // Every index appears after all of its strict predecessors.
  std::span<const std::uint32_t> topological_order() const { return topo_; }
  std::span<const std::uint32_t> strict_predecessors(std::size_t i) const;
  std::size_t order_pair_count() const { return preds_.size(); }

 private:
  void build_order();

  int n_ = 0;
  std::vector<std::uint64_t> parthood_;
  std::vector<std::uint8_t> degree_;
  std::vector<std::uint8_t> cardinality_;
  std::vector<std::uint32_t> by_mask_;
  std::vector<std::uint32_t> topo_;
  std::vector<std::size_t> pred_offsets_;
  std::vector<std::uint32_t> preds_;
};

// Process-wide cache of ordered lattices for n <= 5; built on first use.
std::shared_ptr<const RedundancyLattice> shared_lattice(int n);

}  // namespace pidc
