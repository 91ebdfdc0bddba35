#include "pidc/pid.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "fixed_sum.hpp"
#include "pidc/error.hpp"

namespace pidc {

using detail::from_fixed;
using detail::to_fixed;
using detail::wide_int;

namespace {

template <class W>
double to_double(const W& v) {
  if constexpr (std::is_same_v<W, Rational>) {
    return static_cast<double>(v);
  } else {
    return static_cast<double>(v);
  }
}

// Ratio a*b / (c*d) evaluated so that exact weight types give a correctly
// rounded double.
template <class W>
double ratio(const W& a, const W& b, const W& c, const W& d) {
  if constexpr (std::is_same_v<W, double>) {
    return (a / c) * (b / d);
  } else if constexpr (std::is_same_v<W, std::int64_t>) {
    // Count weights are bounded by 2^26, so both products are exact doubles.
    return static_cast<double>(a * b) / static_cast<double>(c * d);
  } else {
    return static_cast<double>(Rational(a * b / (c * d)));
  }
}

template <class W>
void check_union(const W& u, const W& own, const char* what) {
  bool ok = u > W(0);
  if constexpr (std::is_same_v<W, double>) {
    ok = ok && u >= own * (1 - 1e-9);
  } else {
    ok = ok && u >= own;
  }
  if (!ok) fail(error_kind::invariant, std::string("union probability below outcome probability (") + what + ")");
}

// Agreement-weight tables for every support point (joint with its target)
// and for every distinct source pattern.
template <class W>
struct PointTables {
  std::size_t width = 0;
  std::vector<W> point_agreement;
  std::vector<W> pattern_agreement;
  std::vector<std::size_t> pattern_of_point;
  std::vector<W> point_weight;
  std::vector<W> pattern_weight;
  std::vector<W> point_target_weight;
  std::vector<double> point_mass;
  std::vector<double> pattern_mass;
  W total{};
};

template <class W>
PointTables<W> build_tables(const JointDistribution& dist, const MarginalCache<W>& cache) {
  PointTables<W> tables;
  const std::size_t w = cache.width();
  const std::size_t support = dist.support_size();
  tables.width = w;
  tables.total = cache.total();
  tables.point_agreement.resize(support * w);
  tables.pattern_of_point.resize(support);
  tables.point_weight.resize(support);
  tables.point_target_weight.resize(support);
  tables.point_mass.resize(support);
  const IndexSet full = IndexSet::full(dist.n());
  std::unordered_map<std::uint64_t, std::size_t> pattern_index;
  for (std::size_t k = 0; k < support; ++k) {
    agreement_weights<W>(cache.joint(k), std::span<W>(tables.point_agreement).subspan(k * w, w));
    tables.point_weight[k] = cache.point_weight(k);
    tables.point_target_weight[k] = cache.target_weight(dist.target(k));
    tables.point_mass[k] = to_double(cache.point_weight(k)) / to_double(cache.total());
    const auto [it, inserted] = pattern_index.emplace(dist.source_code(k, full), tables.pattern_weight.size());
    tables.pattern_of_point[k] = it->second;
    if (inserted) {
      tables.pattern_agreement.resize(tables.pattern_agreement.size() + w);
      auto out = std::span<W>(tables.pattern_agreement).subspan(it->second * w, w);
      agreement_weights<W>(cache.source(k), out);
      tables.pattern_weight.push_back(cache.source(k)[w - 1]);
    }
  }
  tables.pattern_mass.resize(tables.pattern_weight.size());
  for (std::size_t p = 0; p < tables.pattern_weight.size(); ++p) {
    tables.pattern_mass[p] = ratio<W>(tables.pattern_weight[p], W(1), tables.total, W(1));
  }
  return tables;
}

struct AntichainSums {
  wide_int redundancy = 0;
  wide_int informative = 0;
  wide_int misinformative = 0;
};

template <class W>
void evaluate_antichain(const PointTables<W>& tables, const JointDistribution& dist, std::uint64_t phi,
                        std::vector<W>& pattern_union, AntichainSums& sums, std::span<wide_int> per_label) {
  const std::size_t w = tables.width;
  const std::size_t patterns = tables.pattern_weight.size();
  for (std::size_t p = 0; p < patterns; ++p) {
    const auto weights = std::span<const W>(tables.pattern_agreement).subspan(p * w, w);
    pattern_union[p] = union_weight_from_agreement<W>(weights, phi);
    check_union(pattern_union[p], tables.pattern_weight[p], "marginal");
    const double informative = std::log2(ratio<W>(tables.total, W(1), pattern_union[p], W(1)));
    sums.informative += to_fixed(tables.pattern_mass[p] * informative);
  }
  for (std::size_t k = 0; k < tables.point_weight.size(); ++k) {
    const auto weights = std::span<const W>(tables.point_agreement).subspan(k * w, w);
    const W joint_union = union_weight_from_agreement<W>(weights, phi);
    check_union(joint_union, tables.point_weight[k], "conditional");
    const W& marginal_union = pattern_union[tables.pattern_of_point[k]];
    const double local = std::log2(ratio<W>(joint_union, tables.total, tables.point_target_weight[k], marginal_union));
    const double mis = std::log2(ratio<W>(tables.point_target_weight[k], W(1), joint_union, W(1)));
    sums.redundancy += to_fixed(tables.point_mass[k] * local);
    sums.misinformative += to_fixed(tables.point_mass[k] * mis);
    if (!per_label.empty()) {
      const double p_s_given_t = ratio<W>(tables.point_weight[k], W(1), tables.point_target_weight[k], W(1));
      per_label[dist.target(k)] += to_fixed(p_s_given_t * local);
    }
  }
}

template <class W>
RedundancyVector run_redundancies(const JointDistribution& dist, const MarginalCache<W>& cache,
                                  std::shared_ptr<const RedundancyLattice> lattice, const RedundancyOptions& options) {
  const PointTables<W> tables = build_tables(dist, cache);
  const std::size_t count = lattice->size();
  const std::size_t labels = static_cast<std::size_t>(dist.target_size());

  std::vector<AntichainSums> sums(count);
  std::vector<wide_int> label_sums(options.per_label ? count * labels : 0);

  std::atomic<std::size_t> next{0};
  constexpr std::size_t chunk = 8;
  auto worker = [&] {
    std::vector<W> pattern_union(tables.pattern_weight.size());
    while (true) {
      const std::size_t begin = next.fetch_add(chunk);
      if (begin >= count) break;
      const std::size_t end = std::min(count, begin + chunk);
      for (std::size_t i = begin; i < end; ++i) {
        std::span<wide_int> row;
        if (options.per_label) row = std::span<wide_int>(label_sums).subspan(i * labels, labels);
        evaluate_antichain(tables, dist, lattice->parthood_mask(i), pattern_union, sums[i], row);
      }
    }
  };
  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  RedundancyVector out;
  out.lattice = lattice;
  out.values.resize(count);
  out.informative.resize(count);
  out.misinformative.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.values[i] = from_fixed(sums[i].redundancy);
    out.informative[i] = from_fixed(sums[i].informative);
    out.misinformative[i] = from_fixed(sums[i].misinformative);
  }
  if (options.per_label) {
    out.per_label.resize(labels);
    for (std::size_t t = 0; t < labels; ++t) {
      if (!(dist.target_marginal()[t] > 0)) continue;
      out.per_label[t].resize(count);
      for (std::size_t i = 0; i < count; ++i) out.per_label[t][i] = from_fixed(label_sums[i * labels + t]);
    }
  }
  return out;
}

void check_mi(double total_mi, double tolerance) {
  if (!(total_mi > tolerance)) {
    fail(error_kind::undefined_complexity,
         "complexity undefined: I(T:S) = " + std::to_string(total_mi) + " bits is not above the tolerance");
  }
}

template <class Fn>
double weighted_average(const RedundancyLattice& lattice, std::span<const double> atoms, double total_mi,
                        double tolerance, Fn weight) {
  if (atoms.size() != lattice.size()) fail(error_kind::invalid_argument, "atom vector does not match lattice");
  check_mi(total_mi, tolerance);
  wide_int acc = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) acc += to_fixed(atoms[i]) * weight(i);
  return from_fixed(acc) / total_mi;
}

}  // namespace

NumericMode parse_numeric_mode(const std::string& name) {
  if (name == "automatic" || name == "auto") return NumericMode::automatic;
  if (name == "floating" || name == "float") return NumericMode::floating;
  if (name == "rational" || name == "exact") return NumericMode::rational;
  fail(error_kind::parse, "unknown numeric mode '" + name + "'");
}

std::string to_string(NumericMode mode) {
  switch (mode) {
    case NumericMode::automatic:
      return "automatic";
    case NumericMode::floating:
      return "floating";
    case NumericMode::rational:
      return "rational";
  }
  return "?";
}

template <class W>
void agreement_weights(std::span<const W> marginals, std::span<W> out) {
  // Superset Moebius transform: w(M) = sum_{B >= M} (-1)^{|B \ M|} W(S_B = s_B).
  std::copy(marginals.begin(), marginals.end(), out.begin());
  const std::size_t width = out.size();
  for (std::size_t bit = 1; bit < width; bit <<= 1) {
    for (std::size_t m = 0; m < width; ++m) {
      if (!(m & bit)) out[m] -= out[m | bit];
    }
  }
}

template <class W>
W union_weight_from_agreement(std::span<const W> weights, std::uint64_t parthood_mask) {
  W acc(0);
  for (std::uint64_t rest = parthood_mask; rest != 0; rest &= rest - 1) acc += weights[std::countr_zero(rest)];
  return acc;
}

template <class W>
W union_weight_inclusion_exclusion(const MarginalCache<W>& cache, std::size_t k, const Antichain& alpha,
                                   bool with_target) {
  const auto elements = alpha.elements();
  const auto table = with_target ? cache.joint(k) : cache.source(k);
  W acc(0);
  const std::uint32_t subsets = 1u << elements.size();
  for (std::uint32_t gamma = 1; gamma < subsets; ++gamma) {
    std::uint32_t joined = 0;
    for (std::uint32_t rest = gamma; rest != 0; rest &= rest - 1) joined |= elements[std::countr_zero(rest)].mask();
    if (std::popcount(gamma) % 2 == 1) {
      acc += table[joined];
    } else {
      acc -= table[joined];
    }
  }
  return acc;
}

template void agreement_weights<double>(std::span<const double>, std::span<double>);
template void agreement_weights<Rational>(std::span<const Rational>, std::span<Rational>);
template void agreement_weights<std::int64_t>(std::span<const std::int64_t>, std::span<std::int64_t>);
template double union_weight_from_agreement<double>(std::span<const double>, std::uint64_t);
template Rational union_weight_from_agreement<Rational>(std::span<const Rational>, std::uint64_t);
template std::int64_t union_weight_from_agreement<std::int64_t>(std::span<const std::int64_t>, std::uint64_t);
template double union_weight_inclusion_exclusion<double>(const MarginalCache<double>&, std::size_t, const Antichain&,
                                                         bool);
template Rational union_weight_inclusion_exclusion<Rational>(const MarginalCache<Rational>&, std::size_t,
                                                             const Antichain&, bool);
template std::int64_t union_weight_inclusion_exclusion<std::int64_t>(const MarginalCache<std::int64_t>&, std::size_t,
                                                                     const Antichain&, bool);

RedundancyVector isx_redundancies(const JointDistribution& dist, std::shared_ptr<const RedundancyLattice> lattice,
                                  const RedundancyOptions& options) {
  if (!lattice || lattice->n() != dist.n()) fail(error_kind::invalid_argument, "lattice does not match distribution");
  switch (options.mode) {
    case NumericMode::rational: {
      if (dist.n() > 3) fail(error_kind::size_limit, "rational mode is limited to n <= 3");
      return run_redundancies(dist, make_exact_cache(dist), std::move(lattice), options);
    }
    case NumericMode::automatic: {
      if (auto counts = count_weights(dist)) {
        return run_redundancies(dist, MarginalCache<std::int64_t>(dist, std::move(counts->weights)),
                                std::move(lattice), options);
      }
      [[fallthrough]];
    }
    case NumericMode::floating:
      return run_redundancies(dist, make_float_cache(dist), std::move(lattice), options);
  }
  fail(error_kind::invalid_argument, "unknown numeric mode");
}

IsxParts isx_parts(const JointDistribution& dist, const Antichain& alpha) {
  if (alpha.n() != dist.n()) fail(error_kind::invalid_argument, "antichain source count mismatch");
  const auto cache = make_float_cache(dist);
  const auto& pt = dist.target_marginal();
  double informative = 0;
  double misinformative = 0;
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    const double u = union_weight_inclusion_exclusion(cache, k, alpha, false);
    const double ut = union_weight_inclusion_exclusion(cache, k, alpha, true) / pt[dist.target(k)];
    check_union(u, cache.source(k)[cache.width() - 1], "marginal");
    check_union(ut, cache.joint(k)[cache.width() - 1] / pt[dist.target(k)], "conditional");
    informative -= dist.mass(k) * std::log2(u);
    misinformative -= dist.mass(k) * std::log2(ut);
  }
  return {informative - misinformative, informative, misinformative};
}

double isx_redundancy(const JointDistribution& dist, const Antichain& alpha) {
  return isx_parts(dist, alpha).redundancy;
}

std::vector<double> moebius_invert(const RedundancyLattice& lattice, std::span<const double> redundancies) {
  if (redundancies.size() != lattice.size()) {
    fail(error_kind::invalid_argument, "redundancy vector has " + std::to_string(redundancies.size()) +
                                           " entries, lattice has " + std::to_string(lattice.size()));
  }
  if (!lattice.has_order()) fail(error_kind::size_limit, "Moebius inversion needs the lattice order");
  std::vector<wide_int> atoms(lattice.size());
  for (std::uint32_t idx : lattice.topological_order()) {
    wide_int acc = to_fixed(redundancies[idx]);
    for (std::uint32_t pred : lattice.strict_predecessors(idx)) acc -= atoms[pred];
    atoms[idx] = acc;
  }
  std::vector<double> out(atoms.size());
  std::transform(atoms.begin(), atoms.end(), out.begin(), from_fixed);
  return out;
}

int degree_of_synergy(const Antichain& alpha) {
  int m = alpha.n() + 1;
  for (IndexSet a : alpha.elements()) m = std::min(m, a.size());
  return m;
}

double representational_complexity(const RedundancyLattice& lattice, std::span<const double> atoms, double total_mi,
                                   double tolerance) {
  return weighted_average(lattice, atoms, total_mi, tolerance,
                          [&](std::size_t i) { return lattice.degree_of_synergy(i); });
}

double multiplicity(const RedundancyLattice& lattice, std::span<const double> atoms, double total_mi,
                    double tolerance) {
  return weighted_average(lattice, atoms, total_mi, tolerance, [&](std::size_t i) { return lattice.cardinality(i); });
}

std::map<int, double> backbone_sums(const RedundancyLattice& lattice, std::span<const double> atoms) {
  if (atoms.size() != lattice.size()) fail(error_kind::invalid_argument, "atom vector does not match lattice");
  std::vector<wide_int> acc(lattice.n() + 1, 0);
  for (std::size_t i = 0; i < atoms.size(); ++i) acc[lattice.degree_of_synergy(i)] += to_fixed(atoms[i]);
  std::map<int, double> out;
  for (int m = 1; m <= lattice.n(); ++m) out[m] = from_fixed(acc[m]);
  return out;
}

std::vector<LabelBreakdown> per_label_breakdown(const JointDistribution& dist,
                                                std::shared_ptr<const RedundancyLattice> lattice,
                                                const RedundancyOptions& options, double tolerance) {
  RedundancyOptions opts = options;
  opts.per_label = true;
  const auto red = isx_redundancies(dist, lattice, opts);
  const std::size_t top = lattice->top();
  std::vector<LabelBreakdown> out;
  for (int t = 0; t < dist.target_size(); ++t) {
    if (red.per_label[t].empty()) continue;
    LabelBreakdown entry;
    entry.target = t;
    entry.label = dist.target_labels.at(t);
    entry.probability = dist.target_marginal()[t];
    entry.redundancies = red.per_label[t];
    entry.atoms = moebius_invert(*lattice, entry.redundancies);
    entry.information = entry.redundancies[top];
    if (entry.information > tolerance) {
      entry.complexity = representational_complexity(*lattice, entry.atoms, entry.information, tolerance);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

bool PidResult::complexity_out_of_range() const {
  return complexity && (*complexity < 1 - 1e-9 || *complexity > n + 1e-9);
}

double PidResult::require_complexity() const {
  if (!complexity) check_mi(total_mi, tolerance);
  return *complexity;
}

PidResult analyze(const JointDistribution& dist, const AnalyzeOptions& options) {
  const int n = dist.n();
  if (n > options.max_sources || n >= max_lattice_sources) {
    fail(error_kind::size_limit, std::to_string(n) + " sources exceed the limit of " +
                                     std::to_string(std::min(options.max_sources, max_lattice_sources - 1)) +
                                     "; reduce with coarse-graining or subsampling");
  }
  PidResult result;
  result.lattice = shared_lattice(n);
  result.n = n;
  result.tolerance = options.tolerance;
  result.mode = options.mode;

  RedundancyOptions ropts{options.mode, options.threads, options.per_label};
  auto red = isx_redundancies(dist, result.lattice, ropts);
  result.redundancies = std::move(red.values);
  result.informative = std::move(red.informative);
  result.misinformative = std::move(red.misinformative);
  result.atoms = moebius_invert(*result.lattice, result.redundancies);
  result.total_mi = mutual_information(dist, IndexSet::full(n));
  result.backbone = backbone_sums(*result.lattice, result.atoms);
  if (result.total_mi > options.tolerance) {
    result.complexity = representational_complexity(*result.lattice, result.atoms, result.total_mi, options.tolerance);
    result.multiplicity = multiplicity(*result.lattice, result.atoms, result.total_mi, options.tolerance);
  }
  if (options.per_label) {
    const std::size_t top = result.lattice->top();
    for (int t = 0; t < dist.target_size(); ++t) {
      if (red.per_label[t].empty()) continue;
      LabelBreakdown entry;
      entry.target = t;
      entry.label = dist.target_labels.at(t);
      entry.probability = dist.target_marginal()[t];
      entry.redundancies = std::move(red.per_label[t]);
      entry.atoms = moebius_invert(*result.lattice, entry.redundancies);
      entry.information = entry.redundancies[top];
      if (entry.information > options.tolerance) {
        entry.complexity =
            representational_complexity(*result.lattice, entry.atoms, entry.information, options.tolerance);
      }
      result.per_label.push_back(std::move(entry));
    }
  }
  return result;
}

PidResult analyze(const ActivationRecordSet& records, const AnalyzeOptions& options) {
  return analyze(estimate_joint(records), options);
}

}  // namespace pidc
