#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pidc/lattice.hpp"
#include "pidc/records.hpp"

namespace pidc {

using Rational = boost::multiprecision::cpp_rational;

struct WeightedPoint {
  int target;
  std::vector<int> sources;
  double mass;
};

struct ExactPoint {
  int target;
  std::vector<int> sources;
  Rational mass;
};

// Exact discrete joint p(T, S_1..S_n) over dense alphabets 0..k-1.  Support
// points are merged, zero-mass points dropped, and the rest sorted by
// (t, s_1, .., s_n).  When built from exact masses the rational values are
// kept alongside the doubles.
class JointDistribution {
 public:
  static JointDistribution from_points(int target_size, std::vector<int> source_sizes,
                                       std::vector<WeightedPoint> points);
  static JointDistribution from_exact_points(int target_size, std::vector<int> source_sizes,
                                             std::vector<ExactPoint> points);

  int n() const { return static_cast<int>(source_sizes_.size()); }
  int target_size() const { return target_size_; }
  std::span<const int> source_sizes() const { return source_sizes_; }

  std::size_t support_size() const { return mass_.size(); }
  int target(std::size_t k) const { return targets_[k]; }
  std::span<const int> sources(std::size_t k) const {
    return std::span<const int>(states_).subspan(k * source_sizes_.size(), source_sizes_.size());
  }
  double mass(std::size_t k) const { return mass_[k]; }

  bool exact() const { return exact_.has_value(); }
  const Rational& exact_mass(std::size_t k) const { return (*exact_)[k]; }

  // p(T = t) for every t in the alphabet.
  const std::vector<double>& target_marginal() const { return p_target_; }

  // Mixed-radix code of s restricted to `b` (in increasing index order).
  std::uint64_t source_code(std::size_t k, IndexSet b) const;

  // Reporting names for the dense alphabets; defaults to "0".."k-1".
  std::vector<std::string> target_labels;
  std::vector<std::vector<std::int64_t>> source_values;

 private:
  void finalize();

  int target_size_ = 0;
  std::vector<int> source_sizes_;
  std::vector<int> targets_;
  std::vector<int> states_;
  std::vector<double> mass_;
  std::optional<std::vector<Rational>> exact_;
  std::vector<double> p_target_;
};

struct EstimateOptions {
  // Activations are bin indices 0..bins-1 and kept as-is (no remapping).
  std::optional<int> declared_bins;
};

// Plug-in estimate p(t, s) = count(t, s) / N with exact rational masses.
// Labels that all parse as integers are ordered numerically, otherwise
// lexicographically; activations are remapped to ascending dense indices.
JointDistribution estimate_joint(const ActivationRecordSet& records, const EstimateOptions& options = {});

struct SourceMarginal {
  IndexSet subset;
  std::vector<std::vector<int>> states;  // values of S_b in increasing index order
  std::vector<double> mass;
};

// p(S_b = .), sorted by state.
SourceMarginal marginalize(const JointDistribution& dist, IndexSet b);
// p(S_b = . | T = t); t must carry positive mass.
SourceMarginal marginalize(const JointDistribution& dist, IndexSet b, int t);

double target_entropy(const JointDistribution& dist);
// I(T : S_a) in bits; a must be nonempty.
double mutual_information(const JointDistribution& dist, IndexSet a);
// H(T | S_a) in bits; the empty set gives H(T).
double conditional_entropy(const JointDistribution& dist, IndexSet a);

// Joint of T with the listed sources (1-based, in the given order).
JointDistribution restrict_sources(const JointDistribution& dist, std::span<const int> indices);

// Integer weights w_k with mass(k) = w_k / denominator, available when the
// exact masses share a denominator of at most 2^26 (so products of two
// weights stay exact in a double).
struct CountWeights {
  std::vector<std::int64_t> weights;
  std::int64_t denominator;
};
std::optional<CountWeights> count_weights(const JointDistribution& dist);

// Per support point k and every b subset of {1..n} (indexed by the mask of
// b): the unnormalized weights W(S_b = s_b) and W(S_b = s_b, T = t_k).
// W is double (masses), Rational (exact masses) or int64 (count weights).
template <class W>
class MarginalCache {
 public:
  MarginalCache(const JointDistribution& dist, std::vector<W> point_weights);

  int n() const { return n_; }
  std::size_t width() const { return std::size_t{1} << n_; }
  std::span<const W> source(std::size_t k) const { return std::span<const W>(source_).subspan(k * width(), width()); }
  std::span<const W> joint(std::size_t k) const { return std::span<const W>(joint_).subspan(k * width(), width()); }
  const W& total() const { return total_; }
  const W& target_weight(int t) const { return target_weight_[t]; }
  const W& point_weight(std::size_t k) const { return point_weight_[k]; }

 private:
  int n_;
  W total_{};
  std::vector<W> point_weight_;
  std::vector<W> target_weight_;
  std::vector<W> source_;
  std::vector<W> joint_;
};

MarginalCache<double> make_float_cache(const JointDistribution& dist);
MarginalCache<Rational> make_exact_cache(const JointDistribution& dist);

extern template class MarginalCache<double>;
extern template class MarginalCache<Rational>;
extern template class MarginalCache<std::int64_t>;

}  // namespace pidc
