#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pidc/distribution.hpp"
#include "pidc/lattice.hpp"

namespace pidc {

inline constexpr double default_mi_tolerance = 1e-9;
inline constexpr int default_max_sources = 5;

// How union probabilities are evaluated before taking logarithms.
//   automatic: integer counts when the masses share a small denominator, doubles otherwise
//   floating:  doubles
//   rational:  exact rationals (n <= 3)
enum class NumericMode { automatic, floating, rational };

NumericMode parse_numeric_mode(const std::string& name);
std::string to_string(NumericMode mode);

struct RedundancyOptions {
  NumericMode mode = NumericMode::automatic;
  unsigned threads = 1;
  bool per_label = false;
};

// I^sx redundancies for every antichain of a lattice, with the expectations
// of the informative and misinformative local parts (values = informative -
// misinformative).  per_label[t][i] is the redundancy conditioned on T = t;
// rows of labels outside the support are empty.
struct RedundancyVector {
  std::shared_ptr<const RedundancyLattice> lattice;
  std::vector<double> values;
  std::vector<double> informative;
  std::vector<double> misinformative;
  std::vector<std::vector<double>> per_label;
};

RedundancyVector isx_redundancies(const JointDistribution& dist, std::shared_ptr<const RedundancyLattice> lattice,
                                  const RedundancyOptions& options = {});

struct IsxParts {
  double redundancy;
  double informative;
  double misinformative;
};

// Single-antichain evaluation with union probabilities by inclusion-exclusion
// over the antichain's nonempty sub-collections.
IsxParts isx_parts(const JointDistribution& dist, const Antichain& alpha);
double isx_redundancy(const JointDistribution& dist, const Antichain& alpha);

// Union weight W(U_{a in alpha} {S_a = s_a}) at support point k, optionally
// jointly with T = t_k, by inclusion-exclusion over gamma subset of alpha.
template <class W>
W union_weight_inclusion_exclusion(const MarginalCache<W>& cache, std::size_t k, const Antichain& alpha,
                                   bool with_target);

// The same union weight from agreement-pattern weights: w(M) is the weight of
// outcomes agreeing with s_k exactly on the index set M, and the union is the
// sum of w over the parthood up-set of alpha.
template <class W>
void agreement_weights(std::span<const W> marginals, std::span<W> out);
template <class W>
W union_weight_from_agreement(std::span<const W> weights, std::uint64_t parthood_mask);

// Pi(alpha) = I(alpha) - sum over strict predecessors of Pi(beta).
std::vector<double> moebius_invert(const RedundancyLattice& lattice, std::span<const double> redundancies);

int degree_of_synergy(const Antichain& alpha);

// C = (1/I) sum_alpha Pi(alpha) m(alpha); throws undefined_complexity when I <= tolerance.
double representational_complexity(const RedundancyLattice& lattice, std::span<const double> atoms, double total_mi,
                                   double tolerance = default_mi_tolerance);
// M = (1/I) sum_alpha Pi(alpha) |alpha|.
double multiplicity(const RedundancyLattice& lattice, std::span<const double> atoms, double total_mi,
                    double tolerance = default_mi_tolerance);
// Atom mass per degree of synergy m = 1..n.
std::map<int, double> backbone_sums(const RedundancyLattice& lattice, std::span<const double> atoms);

// Local decomposition for one target realization: redundancies are
// expectations over p(s | t), atoms their Moebius inversion.
struct LabelBreakdown {
  int target = 0;
  std::string label;
  double probability = 0;
  double information = 0;  // I_cap(t, {1..n}), the specific information of t
  std::vector<double> redundancies;
  std::vector<double> atoms;
  std::optional<double> complexity;
};

std::vector<LabelBreakdown> per_label_breakdown(const JointDistribution& dist,
                                                std::shared_ptr<const RedundancyLattice> lattice,
                                                const RedundancyOptions& options = {},
                                                double tolerance = default_mi_tolerance);

struct AnalyzeOptions {
  double tolerance = default_mi_tolerance;
  NumericMode mode = NumericMode::automatic;
  unsigned threads = 1;
  bool per_label = false;
  int max_sources = default_max_sources;
};

struct PidResult {
  std::shared_ptr<const RedundancyLattice> lattice;
  int n = 0;
  double total_mi = 0;
  std::vector<double> redundancies;
  std::vector<double> informative;
  std::vector<double> misinformative;
  std::vector<double> atoms;
  // Absent when total_mi <= tolerance.
  std::optional<double> complexity;
  std::optional<double> multiplicity;
  std::map<int, double> backbone;
  std::vector<LabelBreakdown> per_label;
  double tolerance = default_mi_tolerance;
  NumericMode mode = NumericMode::automatic;

  // C outside [1, n]; reported, never clamped.
  bool complexity_out_of_range() const;
  double require_complexity() const;
};

PidResult analyze(const JointDistribution& dist, const AnalyzeOptions& options = {});
PidResult analyze(const ActivationRecordSet& records, const AnalyzeOptions& options = {});

}  // namespace pidc
