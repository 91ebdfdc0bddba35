#include "pidc/distribution.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "fixed_sum.hpp"
#include "pidc/error.hpp"

namespace pidc {

namespace {

constexpr double total_mass_tolerance = 1e-12;

void check_alphabets(int target_size, const std::vector<int>& source_sizes) {
  if (target_size < 1) fail(error_kind::invalid_argument, "target alphabet must be nonempty");
  if (source_sizes.empty()) fail(error_kind::invalid_argument, "need at least one source");
  if (source_sizes.size() > static_cast<std::size_t>(max_sources)) {
    fail(error_kind::size_limit, "at most " + std::to_string(max_sources) + " sources supported");
  }
  // Mixed-radix codes of (t, s) must fit in 63 bits.
  long double product = target_size;
  for (int k : source_sizes) {
    if (k < 1) fail(error_kind::invalid_argument, "source alphabet must be nonempty");
    product *= k;
  }
  if (product > 9.2e18L) fail(error_kind::size_limit, "joint alphabet too large to index");
}

template <class Point>
std::vector<Point> merge_points(int target_size, const std::vector<int>& sizes, std::vector<Point> points) {
  for (const auto& p : points) {
    if (p.target < 0 || p.target >= target_size) {
      fail(error_kind::invalid_argument, "target value " + std::to_string(p.target) + " outside alphabet");
    }
    if (p.sources.size() != sizes.size()) fail(error_kind::invalid_argument, "point arity mismatch");
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      if (p.sources[j] < 0 || p.sources[j] >= sizes[j]) {
        fail(error_kind::invalid_argument,
             "source " + std::to_string(j + 1) + " value " + std::to_string(p.sources[j]) + " outside alphabet");
      }
    }
    if (!(p.mass >= 0)) fail(error_kind::invalid_argument, "negative or NaN probability mass");
  }
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.target != b.target) return a.target < b.target;
    return a.sources < b.sources;
  });
  std::vector<Point> merged;
  for (auto& p : points) {
    if (!merged.empty() && merged.back().target == p.target && merged.back().sources == p.sources) {
      merged.back().mass += p.mass;
    } else {
      merged.push_back(std::move(p));
    }
  }
  std::erase_if(merged, [](const Point& p) { return p.mass == 0; });
  if (merged.empty()) fail(error_kind::invalid_argument, "distribution has empty support");
  return merged;
}

double log2_ratio(double num, double den) { return std::log2(num / den); }

bool all_integers(const std::vector<std::string>& labels) {
  return std::all_of(labels.begin(), labels.end(), [](const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size();
  });
}

struct Grouped {
  std::uint64_t code;
  int target;
  double mass;
};

// Support re-keyed by (code of s_a, t) and sorted so that equal codes are
// contiguous and, within them, equal targets are contiguous.
std::vector<Grouped> group_by(const JointDistribution& dist, IndexSet a) {
  std::vector<Grouped> rows;
  rows.reserve(dist.support_size());
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    rows.push_back({dist.source_code(k, a), dist.target(k), dist.mass(k)});
  }
  std::sort(rows.begin(), rows.end(), [](const Grouped& x, const Grouped& y) {
    return x.code != y.code ? x.code < y.code : x.target < y.target;
  });
  return rows;
}

void check_subset(const JointDistribution& dist, IndexSet a) {
  if (!a.subset_of(IndexSet::full(dist.n()))) {
    fail(error_kind::invalid_argument, "index set {" + a.to_string() + "} exceeds n=" + std::to_string(dist.n()));
  }
}

}  // namespace

JointDistribution JointDistribution::from_points(int target_size, std::vector<int> source_sizes,
                                                 std::vector<WeightedPoint> points) {
  check_alphabets(target_size, source_sizes);
  for (const auto& p : points) {
    if (!std::isfinite(p.mass)) fail(error_kind::invalid_argument, "non-finite probability mass");
  }
  auto merged = merge_points(target_size, source_sizes, std::move(points));
  JointDistribution d;
  d.target_size_ = target_size;
  d.source_sizes_ = std::move(source_sizes);
  double total = 0;
  for (auto& p : merged) {
    d.targets_.push_back(p.target);
    d.states_.insert(d.states_.end(), p.sources.begin(), p.sources.end());
    d.mass_.push_back(p.mass);
    total += p.mass;
  }
  if (std::abs(total - 1.0) > total_mass_tolerance) {
    fail(error_kind::invalid_argument, "total probability mass " + std::to_string(total) + " != 1");
  }
  d.finalize();
  return d;
}

JointDistribution JointDistribution::from_exact_points(int target_size, std::vector<int> source_sizes,
                                                       std::vector<ExactPoint> points) {
  check_alphabets(target_size, source_sizes);
  auto merged = merge_points(target_size, source_sizes, std::move(points));
  JointDistribution d;
  d.target_size_ = target_size;
  d.source_sizes_ = std::move(source_sizes);
  d.exact_.emplace();
  Rational total = 0;
  for (auto& p : merged) {
    d.targets_.push_back(p.target);
    d.states_.insert(d.states_.end(), p.sources.begin(), p.sources.end());
    d.mass_.push_back(static_cast<double>(p.mass));
    total += p.mass;
    d.exact_->push_back(std::move(p.mass));
  }
  if (total != 1) fail(error_kind::invalid_argument, "exact probability masses do not sum to 1");
  d.finalize();
  return d;
}

void JointDistribution::finalize() {
  p_target_.assign(target_size_, 0.0);
  for (std::size_t k = 0; k < mass_.size(); ++k) p_target_[targets_[k]] += mass_[k];
  target_labels.resize(target_size_);
  for (int t = 0; t < target_size_; ++t) target_labels[t] = std::to_string(t);
  source_values.resize(source_sizes_.size());
  for (std::size_t j = 0; j < source_sizes_.size(); ++j) {
    source_values[j].resize(source_sizes_[j]);
    std::iota(source_values[j].begin(), source_values[j].end(), 0);
  }
}

std::uint64_t JointDistribution::source_code(std::size_t k, IndexSet b) const {
  const auto s = sources(k);
  std::uint64_t code = 0;
  for (std::uint32_t rest = b.mask(); rest != 0; rest &= rest - 1) {
    const int j = std::countr_zero(rest);
    code = code * static_cast<std::uint64_t>(source_sizes_[j]) + static_cast<std::uint64_t>(s[j]);
  }
  return code;
}

JointDistribution estimate_joint(const ActivationRecordSet& records, const EstimateOptions& options) {
  if (records.empty()) fail(error_kind::invalid_argument, "cannot estimate a joint from zero records");
  const std::size_t n = records.arity();
  const auto bins = options.declared_bins ? options.declared_bins : records.declared_bins;

  std::vector<std::string> labels;
  for (std::size_t r = 0; r < records.size(); ++r) labels.push_back(records.label(r));
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (all_integers(labels)) {
    std::sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return std::stoll(a) < std::stoll(b);
    });
  }
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < labels.size(); ++i) label_index[labels[i]] = static_cast<int>(i);

  std::vector<std::vector<std::int64_t>> values(n);
  std::vector<int> sizes(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (bins) {
      values[j].resize(*bins);
      std::iota(values[j].begin(), values[j].end(), 0);
    } else {
      for (std::size_t r = 0; r < records.size(); ++r) values[j].push_back(records.activations(r)[j]);
      std::sort(values[j].begin(), values[j].end());
      values[j].erase(std::unique(values[j].begin(), values[j].end()), values[j].end());
    }
    sizes[j] = static_cast<int>(values[j].size());
  }

  std::map<std::pair<int, std::vector<int>>, std::uint64_t> counts;
  std::vector<int> s(n);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto act = records.activations(r);
    for (std::size_t j = 0; j < n; ++j) {
      if (bins) {
        if (act[j] < 0 || act[j] >= *bins) {
          fail(error_kind::invalid_argument, "row " + std::to_string(r + 1) + ": activation " +
                                                 std::to_string(act[j]) + " outside 0.." + std::to_string(*bins - 1));
        }
        s[j] = static_cast<int>(act[j]);
      } else {
        s[j] = static_cast<int>(std::lower_bound(values[j].begin(), values[j].end(), act[j]) - values[j].begin());
      }
    }
    ++counts[{label_index.at(records.label(r)), s}];
  }

  std::vector<ExactPoint> points;
  const auto total = static_cast<std::int64_t>(records.size());
  for (auto& [key, count] : counts) {
    points.push_back({key.first, key.second, Rational(static_cast<std::int64_t>(count), total)});
  }
  auto dist = JointDistribution::from_exact_points(static_cast<int>(labels.size()), sizes, std::move(points));
  dist.target_labels = labels;
  dist.source_values = values;
  return dist;
}

SourceMarginal marginalize(const JointDistribution& dist, IndexSet b) {
  if (b.empty()) fail(error_kind::invalid_argument, "marginal over the empty source set");
  check_subset(dist, b);
  std::map<std::vector<int>, double> acc;
  const auto members = b.members();
  std::vector<int> key(members.size());
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    const auto s = dist.sources(k);
    for (std::size_t i = 0; i < members.size(); ++i) key[i] = s[members[i] - 1];
    acc[key] += dist.mass(k);
  }
  SourceMarginal out{b, {}, {}};
  for (auto& [state, mass] : acc) {
    out.states.push_back(state);
    out.mass.push_back(mass);
  }
  return out;
}

SourceMarginal marginalize(const JointDistribution& dist, IndexSet b, int t) {
  if (t < 0 || t >= dist.target_size() || dist.target_marginal()[t] <= 0) {
    fail(error_kind::invalid_argument, "conditioning on target value " + std::to_string(t) + " with zero mass");
  }
  if (b.empty()) fail(error_kind::invalid_argument, "marginal over the empty source set");
  check_subset(dist, b);
  std::map<std::vector<int>, double> acc;
  const auto members = b.members();
  std::vector<int> key(members.size());
  const double pt = dist.target_marginal()[t];
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    if (dist.target(k) != t) continue;
    const auto s = dist.sources(k);
    for (std::size_t i = 0; i < members.size(); ++i) key[i] = s[members[i] - 1];
    acc[key] += dist.mass(k) / pt;
  }
  SourceMarginal out{b, {}, {}};
  for (auto& [state, mass] : acc) {
    out.states.push_back(state);
    out.mass.push_back(mass);
  }
  return out;
}

double target_entropy(const JointDistribution& dist) {
  double h = 0;
  for (double p : dist.target_marginal()) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

namespace {

// Group sums and the final expectation are accumulated in fixed point so the
// result does not depend on the order of the support.
template <class Term>
double grouped_expectation(const JointDistribution& dist, IndexSet a, Term term) {
  const auto rows = group_by(dist, a);
  detail::wide_int acc = 0;
  for (std::size_t i = 0; i < rows.size();) {
    std::size_t end = i;
    detail::wide_int ps = 0;
    while (end < rows.size() && rows[end].code == rows[i].code) ps += detail::to_fixed(rows[end++].mass);
    for (std::size_t j = i; j < end;) {
      detail::wide_int pts = 0;
      std::size_t k = j;
      while (k < end && rows[k].target == rows[j].target) pts += detail::to_fixed(rows[k++].mass);
      const double joint = detail::from_fixed(pts);
      acc += detail::to_fixed(joint * term(joint, detail::from_fixed(ps), rows[j].target));
      j = k;
    }
    i = end;
  }
  return detail::from_fixed(acc);
}

}  // namespace

double mutual_information(const JointDistribution& dist, IndexSet a) {
  if (a.empty()) fail(error_kind::invalid_argument, "mutual information needs a nonempty source set");
  check_subset(dist, a);
  const auto& pt = dist.target_marginal();
  return grouped_expectation(dist, a, [&](double pts, double ps, int t) { return log2_ratio(pts, pt[t] * ps); });
}

double conditional_entropy(const JointDistribution& dist, IndexSet a) {
  if (a.empty()) return target_entropy(dist);
  check_subset(dist, a);
  return grouped_expectation(dist, a, [](double pts, double ps, int) { return -std::log2(pts / ps); });
}

JointDistribution restrict_sources(const JointDistribution& dist, std::span<const int> indices) {
  if (indices.empty()) fail(error_kind::invalid_argument, "no sources selected");
  std::vector<int> seen(dist.n(), 0);
  for (int i : indices) {
    if (i < 1 || i > dist.n()) {
      fail(error_kind::invalid_argument, "source index " + std::to_string(i) + " outside 1.." + std::to_string(dist.n()));
    }
    if (seen[i - 1]++) fail(error_kind::invalid_argument, "duplicate source index " + std::to_string(i));
  }
  std::vector<int> sizes;
  for (int i : indices) sizes.push_back(dist.source_sizes()[i - 1]);
  auto pick = [&](std::size_t k) {
    std::vector<int> s;
    for (int i : indices) s.push_back(dist.sources(k)[i - 1]);
    return s;
  };
  JointDistribution out = [&] {
    if (dist.exact()) {
      std::vector<ExactPoint> pts;
      for (std::size_t k = 0; k < dist.support_size(); ++k) pts.push_back({dist.target(k), pick(k), dist.exact_mass(k)});
      return JointDistribution::from_exact_points(dist.target_size(), sizes, std::move(pts));
    }
    std::vector<WeightedPoint> pts;
    for (std::size_t k = 0; k < dist.support_size(); ++k) pts.push_back({dist.target(k), pick(k), dist.mass(k)});
    return JointDistribution::from_points(dist.target_size(), sizes, std::move(pts));
  }();
  out.target_labels = dist.target_labels;
  out.source_values.clear();
  for (int i : indices) out.source_values.push_back(dist.source_values[i - 1]);
  return out;
}

std::optional<CountWeights> count_weights(const JointDistribution& dist) {
  if (!dist.exact()) return std::nullopt;
  constexpr std::int64_t limit = std::int64_t{1} << 26;
  boost::multiprecision::cpp_int lcm = 1;
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(dist.exact_mass(k)));
    if (lcm > limit) return std::nullopt;
  }
  CountWeights out{{}, lcm.convert_to<std::int64_t>()};
  for (std::size_t k = 0; k < dist.support_size(); ++k) {
    const Rational scaled = dist.exact_mass(k) * Rational(lcm);
    out.weights.push_back(boost::multiprecision::numerator(scaled).convert_to<std::int64_t>());
  }
  return out;
}

template <class W>
MarginalCache<W>::MarginalCache(const JointDistribution& dist, std::vector<W> point_weights)
    : n_(dist.n()), point_weight_(std::move(point_weights)) {
  if (n_ > max_lattice_sources) fail(error_kind::size_limit, "marginal cache supports at most 6 sources");
  const std::size_t support = dist.support_size();
  if (point_weight_.size() != support) fail(error_kind::invalid_argument, "one weight per support point required");
  const std::size_t w = width();
  target_weight_.assign(dist.target_size(), W(0));
  total_ = W(0);
  for (std::size_t k = 0; k < support; ++k) {
    target_weight_[dist.target(k)] += point_weight_[k];
    total_ += point_weight_[k];
  }

  source_.assign(support * w, W(0));
  joint_.assign(support * w, W(0));
  const auto tsize = static_cast<std::uint64_t>(dist.target_size());
  std::vector<std::uint64_t> codes(support);
  for (std::size_t b = 0; b < w; ++b) {
    if (b == 0) {
      for (std::size_t k = 0; k < support; ++k) {
        source_[k * w] = total_;
        joint_[k * w] = target_weight_[dist.target(k)];
      }
      continue;
    }
    const IndexSet subset(static_cast<std::uint32_t>(b));
    std::unordered_map<std::uint64_t, W> by_source;
    std::unordered_map<std::uint64_t, W> by_joint;
    for (std::size_t k = 0; k < support; ++k) {
      codes[k] = dist.source_code(k, subset);
      by_source[codes[k]] += point_weight_[k];
      by_joint[codes[k] * tsize + static_cast<std::uint64_t>(dist.target(k))] += point_weight_[k];
    }
    for (std::size_t k = 0; k < support; ++k) {
      source_[k * w + b] = by_source.at(codes[k]);
      joint_[k * w + b] = by_joint.at(codes[k] * tsize + static_cast<std::uint64_t>(dist.target(k)));
    }
  }
}

MarginalCache<double> make_float_cache(const JointDistribution& dist) {
  std::vector<double> weights(dist.support_size());
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = dist.mass(k);
  return MarginalCache<double>(dist, std::move(weights));
}

MarginalCache<Rational> make_exact_cache(const JointDistribution& dist) {
  if (!dist.exact()) fail(error_kind::invalid_argument, "exact arithmetic needs a distribution with exact masses");
  std::vector<Rational> weights(dist.support_size());
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = dist.exact_mass(k);
  return MarginalCache<Rational>(dist, std::move(weights));
}

template class MarginalCache<double>;
template class MarginalCache<Rational>;
template class MarginalCache<std::int64_t>;

}  // namespace pidc
