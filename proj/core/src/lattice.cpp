#include "pidc/lattice.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <map>
#include <mutex>
#include <numeric>

#include "pidc/error.hpp"

namespace pidc {

namespace {

void check_lattice_n(int n) {
  if (n < 1 || n > max_lattice_sources) {
    fail(error_kind::invalid_argument,
         "source count " + std::to_string(n) + " outside 1.." + std::to_string(max_lattice_sources));
  }
}

std::uint32_t min_mask_of_parthood(std::uint64_t phi, int n, std::vector<IndexSet>& out) {
  // Minimal sets of the up-set: Phi(s)=1 and Phi(s \ {i})=0 for every member i.
  out.clear();
  for (IndexSet s : canonical_subsets(n)) {
    if (!((phi >> s.mask()) & 1u)) continue;
    bool minimal = true;
    for (std::uint32_t rest = s.mask(); rest != 0; rest &= rest - 1) {
      const std::uint32_t bit = rest & (~rest + 1);
      if ((phi >> (s.mask() & ~bit)) & 1u) {
        minimal = false;
        break;
      }
    }
    if (minimal) out.push_back(s);
  }
  return static_cast<std::uint32_t>(out.size());
}

}  // namespace

IndexSet IndexSet::of(std::initializer_list<int> one_based) {
  return of(std::span<const int>(one_based.begin(), one_based.size()));
}

IndexSet IndexSet::of(std::span<const int> one_based) {
  std::uint32_t mask = 0;
  for (int i : one_based) {
    if (i < 1 || i > max_sources) {
      fail(error_kind::invalid_argument, "source index " + std::to_string(i) + " out of range");
    }
    mask |= 1u << (i - 1);
  }
  return IndexSet(mask);
}

int IndexSet::size() const { return std::popcount(mask_); }

int IndexSet::max_member() const { return 32 - std::countl_zero(mask_); }

std::vector<int> IndexSet::members() const {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i) {
    if ((mask_ >> i) & 1u) out.push_back(i + 1);
  }
  return out;
}

std::string IndexSet::to_string() const {
  std::string out;
  for (int i : members()) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

bool canonical_less(IndexSet a, IndexSet b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto am = a.members();
  const auto bm = b.members();
  return am < bm;
}

std::vector<IndexSet> canonical_subsets(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<IndexSet>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<IndexSet> subsets;
  const std::uint32_t limit = (n >= 32) ? ~0u : (1u << n);
  for (std::uint32_t m = 1; m < limit; ++m) subsets.emplace_back(m);
  std::sort(subsets.begin(), subsets.end(), canonical_less);
  cache.emplace(n, subsets);
  return subsets;
}

Antichain Antichain::from_sets(std::vector<IndexSet> sets, int n) {
  check_lattice_n(n);
  if (sets.empty()) fail(error_kind::invalid_argument, "antichain must be nonempty");
  const IndexSet full = IndexSet::full(n);
  for (IndexSet s : sets) {
    if (s.empty()) fail(error_kind::invalid_argument, "antichain element must be nonempty");
    if (!s.subset_of(full)) {
      fail(error_kind::invalid_argument, "antichain element {" + s.to_string() + "} exceeds n=" + std::to_string(n));
    }
  }
  std::sort(sets.begin(), sets.end(), canonical_less);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    for (std::size_t j = i + 1; j < sets.size(); ++j) {
      if (sets[i].subset_of(sets[j]) || sets[j].subset_of(sets[i])) {
        fail(error_kind::invalid_argument,
             "antichain elements {" + sets[i].to_string() + "} and {" + sets[j].to_string() + "} are comparable");
      }
    }
  }
  return Antichain(n, std::move(sets));
}

Antichain Antichain::parse(std::string_view text, int n) {
  std::vector<IndexSet> sets;
  std::size_t pos = 0;
  auto bad = [&](const std::string& why) {
    fail(error_kind::parse, "bad antichain '" + std::string(text) + "': " + why);
  };
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    if (text[pos] != '{') bad("expected '{'");
    const auto close = text.find('}', pos);
    if (close == std::string_view::npos) bad("missing '}'");
    std::vector<int> members;
    std::string_view body = text.substr(pos + 1, close - pos - 1);
    while (!body.empty()) {
      const auto comma = body.find(',');
      std::string_view tok = body.substr(0, comma);
      int v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) bad("non-integer index");
      members.push_back(v);
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    if (members.empty()) bad("empty set");
    const IndexSet s = IndexSet::of(members);
    if (static_cast<std::size_t>(s.size()) != members.size()) bad("repeated index");
    sets.push_back(s);
    pos = close + 1;
  }
  return from_sets(std::move(sets), n);
}

std::string Antichain::to_string() const {
  std::string out;
  for (IndexSet s : elements_) out += "{" + s.to_string() + "}";
  return out;
}

bool lattice_leq(const Antichain& alpha, const Antichain& beta) {
  if (alpha.n() != beta.n()) {
    fail(error_kind::invalid_argument, "antichains over different source counts");
  }
  for (IndexSet b : beta.elements()) {
    const bool covered = std::any_of(alpha.elements().begin(), alpha.elements().end(),
                                     [&](IndexSet a) { return a.subset_of(b); });
    if (!covered) return false;
  }
  return true;
}

std::uint64_t upset_mask(IndexSet a, int n) {
  std::uint64_t bits = 0;
  const std::uint32_t limit = 1u << n;
  for (std::uint32_t m = 0; m < limit; ++m) {
    if ((a.mask() & ~m) == 0) bits |= std::uint64_t{1} << m;
  }
  return bits;
}

ParthoodDistribution ParthoodDistribution::from_mask(int n, std::uint64_t values) {
  check_lattice_n(n);
  const std::uint32_t limit = 1u << n;
  if (limit < 64 && (values >> limit) != 0) {
    fail(error_kind::invariant, "parthood distribution has bits beyond 2^n");
  }
  if (values & 1u) fail(error_kind::invariant, "parthood distribution maps the empty set to 1");
  if (!((values >> (limit - 1)) & 1u)) {
    fail(error_kind::invariant, "parthood distribution maps the full set to 0");
  }
  for (std::uint32_t m = 0; m < limit; ++m) {
    if (!((values >> m) & 1u)) continue;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t sup = m | (1u << i);
      if (!((values >> sup) & 1u)) {
        fail(error_kind::invariant, "parthood distribution is not monotone");
      }
    }
  }
  return ParthoodDistribution(n, values);
}

ParthoodDistribution antichain_to_parthood(const Antichain& alpha, int n) {
  if (alpha.n() != n) fail(error_kind::invalid_argument, "antichain source count mismatch");
  std::uint64_t bits = 0;
  for (IndexSet a : alpha.elements()) bits |= upset_mask(a, n);
  return ParthoodDistribution::from_mask(n, bits);
}

Antichain parthood_to_antichain(const ParthoodDistribution& phi) {
  std::vector<IndexSet> minimal;
  min_mask_of_parthood(phi.mask(), phi.n(), minimal);
  return Antichain::from_sets(std::move(minimal), phi.n());
}

std::size_t estimate_lattice_bytes(int n, bool with_order) {
  static constexpr std::size_t counts[] = {0, 1, 4, 18, 166, 7579, 7828352};
  check_lattice_n(n);
  const std::size_t count = counts[n];
  std::size_t bytes = count * (sizeof(std::uint64_t) + 2 * sizeof(std::uint8_t) + 2 * sizeof(std::uint32_t));
  if (with_order) {
    // About 7.8M comparable pairs at n = 5, i.e. roughly count^2 / 7.
    bytes += count * sizeof(std::size_t) + (count * count / 7) * sizeof(std::uint32_t);
  }
  return bytes;
}

RedundancyLattice RedundancyLattice::enumerate(int n, const LatticeOptions& options) {
  check_lattice_n(n);
  if (n == max_lattice_sources && !options.allow_large) {
    fail(error_kind::size_limit,
         "n=6 lattice needs about " + std::to_string(estimate_lattice_bytes(6, false) >> 20) +
             " MiB; pass the allow-large override");
  }
  if (n == max_lattice_sources && options.build_order) {
    fail(error_kind::size_limit, "order precomputation for n=6 is infeasible; disable build_order");
  }

  const std::vector<IndexSet> subsets = canonical_subsets(n);
  std::vector<std::uint64_t> ups(subsets.size());
  for (std::size_t i = 0; i < subsets.size(); ++i) ups[i] = upset_mask(subsets[i], n);

  RedundancyLattice lattice;
  lattice.n_ = n;

  struct Frame {
    std::size_t next;
    std::uint64_t phi;
    int min_size;
    int count;
  };
  // Depth-first extension in canonical subset order.  A later subset is never
  // smaller than an earlier one, so it is comparable to the current antichain
  // exactly when it already lies in the antichain's up-set.
  std::vector<Frame> stack;
  stack.push_back({0, 0, 0, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == subsets.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t i = top.next++;
    const IndexSet s = subsets[i];
    if ((top.phi >> s.mask()) & 1u) continue;
    Frame child{i + 1, top.phi | ups[i], top.count == 0 ? s.size() : top.min_size, top.count + 1};
    lattice.parthood_.push_back(child.phi);
    lattice.degree_.push_back(static_cast<std::uint8_t>(child.min_size));
    lattice.cardinality_.push_back(static_cast<std::uint8_t>(child.count));
    stack.push_back(child);
  }

  lattice.by_mask_.resize(lattice.parthood_.size());
  std::iota(lattice.by_mask_.begin(), lattice.by_mask_.end(), 0u);
  std::sort(lattice.by_mask_.begin(), lattice.by_mask_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return lattice.parthood_[a] < lattice.parthood_[b];
  });

  lattice.topo_.resize(lattice.parthood_.size());
  std::iota(lattice.topo_.begin(), lattice.topo_.end(), 0u);
  // alpha < beta implies Phi_beta is a proper subset of Phi_alpha, so a larger
  // up-set comes first.
  std::stable_sort(lattice.topo_.begin(), lattice.topo_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return std::popcount(lattice.parthood_[a]) > std::popcount(lattice.parthood_[b]);
  });

  if (options.build_order) lattice.build_order();
  return lattice;
}

void RedundancyLattice::build_order() {
  const std::size_t count = parthood_.size();
  pred_offsets_.assign(count + 1, 0);
  preds_.clear();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t phi = parthood_[i];
    for (std::size_t j = 0; j < count; ++j) {
      if (j != i && (phi & ~parthood_[j]) == 0) preds_.push_back(static_cast<std::uint32_t>(j));
    }
    pred_offsets_[i + 1] = preds_.size();
  }
  preds_.shrink_to_fit();
}

Antichain RedundancyLattice::antichain(std::size_t i) const {
  std::vector<IndexSet> minimal;
  min_mask_of_parthood(parthood_.at(i), n_, minimal);
  return Antichain::from_sets(std::move(minimal), n_);
}

std::optional<std::size_t> RedundancyLattice::find(std::uint64_t mask) const {
  auto it = std::lower_bound(by_mask_.begin(), by_mask_.end(), mask,
                             [&](std::uint32_t idx, std::uint64_t m) { return parthood_[idx] < m; });
  if (it == by_mask_.end() || parthood_[*it] != mask) return std::nullopt;
  return *it;
}

std::optional<std::size_t> RedundancyLattice::find(const Antichain& alpha) const {
  if (alpha.n() != n_) fail(error_kind::invalid_argument, "antichain source count mismatch");
  return find(antichain_to_parthood(alpha, n_).mask());
}

std::size_t RedundancyLattice::singleton(IndexSet a) const {
  auto idx = find(upset_mask(a, n_));
  if (!idx || a.empty() || !a.subset_of(IndexSet::full(n_))) {
    fail(error_kind::invalid_argument, "no singleton antichain for {" + a.to_string() + "}");
  }
  return *idx;
}

std::span<const std::uint32_t> RedundancyLattice::strict_predecessors(std::size_t i) const {
  if (!has_order()) fail(error_kind::invariant, "lattice was enumerated without order lists");
  return std::span<const std::uint32_t>(preds_).subspan(pred_offsets_[i], pred_offsets_[i + 1] - pred_offsets_[i]);
}

std::shared_ptr<const RedundancyLattice> shared_lattice(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const RedundancyLattice>> cache;
  if (n < 1 || n >= max_lattice_sources) {
    fail(error_kind::size_limit, "full PID supports 1..5 sources, got " + std::to_string(n));
  }
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const RedundancyLattice>(RedundancyLattice::enumerate(n));
  return slot;
}

}  // namespace pidc
