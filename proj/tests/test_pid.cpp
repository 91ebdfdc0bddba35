#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pidc/error.hpp"
#include "pidc/pid.hpp"
#include "pidc/toys.hpp"
#include "support/joints.hpp"
#include "support/oracle.hpp"

using namespace pidc;
namespace oracle = pidc::testing::oracle;

namespace {

JointDistribution copy_pair() { return testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {1, {1, 1}}}); }

JointDistribution xor_pair() {
  return testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {1, {0, 1}}, {1, {1, 0}}, {0, {1, 1}}});
}

JointDistribution single_relevant() {
  return testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {0, {0, 1}}, {1, {1, 0}}, {1, {1, 1}}});
}

JointDistribution independent() {
  return testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {0, {1, 1}}, {1, {0, 0}}, {1, {1, 1}}});
}

double atom(const PidResult& r, const std::string& name) {
  return r.atoms.at(r.lattice->find(Antichain::parse(name, r.n)).value());
}

// Relabels source values and target values by fixed permutations and
// reverses source order.
JointDistribution scramble(const JointDistribution& d) {
  std::vector<ExactPoint> pts;
  const int n = d.n();
  std::vector<int> sizes(d.source_sizes().rbegin(), d.source_sizes().rend());
  for (std::size_t k = 0; k < d.support_size(); ++k) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) {
      const int size = d.source_sizes()[i];
      s[n - 1 - i] = (d.sources(k)[i] + 1) % size;
    }
    pts.push_back({(d.target(k) + 1) % d.target_size(), s, d.exact_mass(k)});
  }
  return JointDistribution::from_exact_points(d.target_size(), sizes, std::move(pts));
}

}  // namespace

TEST_SUITE("pid") {
  TEST_CASE("frozen oracle: irregular three-source joint") {
    const auto r = analyze(oracle::irregular3());
    CHECK(std::abs(r.total_mi - oracle::irregular3_mi) < 1e-12);
    for (const auto& [name, value] : oracle::irregular3_atoms()) {
      CAPTURE(name);
      CHECK(std::abs(atom(r, name) - value) < 1e-12);
    }
    CHECK(std::abs(*r.complexity - oracle::irregular3_complexity) < 1e-12);
    CHECK(std::abs(*r.multiplicity - oracle::irregular3_multiplicity) < 1e-12);
  }

  TEST_CASE("numeric modes agree") {
    const auto d = oracle::irregular3();
    AnalyzeOptions o;
    const auto a = analyze(d, o);
    o.mode = NumericMode::floating;
    const auto f = analyze(d, o);
    o.mode = NumericMode::rational;
    const auto q = analyze(d, o);
    for (std::size_t i = 0; i < a.atoms.size(); ++i) {
      CHECK(std::abs(a.atoms[i] - f.atoms[i]) < 1e-12);
      CHECK(std::abs(a.atoms[i] - q.atoms[i]) < 1e-12);
    }
    std::mt19937_64 rng(5);
    o.mode = NumericMode::rational;
    CHECK_THROWS_AS(analyze(testing::random_joint(rng, 4, 2, 2, 8), o), error);
    CHECK_THROWS_AS(analyze(testing::random_real_joint(rng, 2, 2, 2, 8), o), error);
    CHECK(parse_numeric_mode("rational") == NumericMode::rational);
    CHECK_THROWS_AS(parse_numeric_mode("fast"), error);
  }

  TEST_CASE("copy chain") {
    const auto r = analyze(copy_pair());
    CHECK(r.redundancies == std::vector<double>(4, 1.0));
    CHECK(atom(r, "{1}{2}") == doctest::Approx(1.0));
    CHECK(std::abs(atom(r, "{1}")) < 1e-12);
    CHECK(std::abs(atom(r, "{2}")) < 1e-12);
    CHECK(std::abs(atom(r, "{1,2}")) < 1e-12);
    CHECK(*r.complexity == doctest::Approx(1.0));
    CHECK(*r.multiplicity == doctest::Approx(2.0));
    CHECK(isx_redundancy(copy_pair(), Antichain::parse("{1}{2}", 2)) == doctest::Approx(1.0));
  }

  TEST_CASE("single relevant source") {
    const auto r = analyze(single_relevant());
    const double l = std::log2(3.0);
    CHECK(atom(r, "{1}{2}") == doctest::Approx(2 - l));
    CHECK(atom(r, "{1}") == doctest::Approx(l - 1));
    CHECK(atom(r, "{2}") == doctest::Approx(l - 2));
    CHECK(atom(r, "{1,2}") == doctest::Approx(2 - l));
    CHECK(*r.complexity == doctest::Approx(3 - l));
    CHECK(*r.multiplicity == doctest::Approx(3 - l));
  }

  TEST_CASE("xor pair") {
    const auto r = analyze(xor_pair());
    const double l = std::log2(3.0);
    CHECK(r.total_mi == doctest::Approx(1.0));
    CHECK(atom(r, "{1}{2}") == doctest::Approx(1 - l));
    CHECK(atom(r, "{1}") == doctest::Approx(l - 1));
    CHECK(atom(r, "{1,2}") == doctest::Approx(2 - l));
    CHECK(*r.complexity == doctest::Approx(3 - l));
    CHECK(r.backbone.at(2) == doctest::Approx(1.0 - r.backbone.at(1)));
    CHECK(r.backbone.at(1) + r.backbone.at(2) == doctest::Approx(1.0));
  }

  TEST_CASE("independent target: zero redundancies and undefined complexity") {
    const auto d = independent();
    for (const char* a : {"{1}{2}", "{1}", "{1,2}"}) CHECK(std::abs(isx_redundancy(d, Antichain::parse(a, 2))) < 1e-12);
    const auto r = analyze(d);
    for (double x : r.atoms) CHECK(std::abs(x) < 1e-12);
    for (const auto& [m, v] : r.backbone) CHECK(std::abs(v) < 1e-12);
    CHECK_FALSE(r.complexity);
    try {
      r.require_complexity();
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(e.kind() == error_kind::undefined_complexity);
    }
    CHECK_THROWS_AS(representational_complexity(*r.lattice, r.atoms, 0.0), error);
    CHECK_THROWS_AS(multiplicity(*r.lattice, r.atoms, 0.0), error);
  }

  TEST_CASE("self-redundancy equals mutual information") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const auto d = testing::random_joint(rng, 3, 3, 3, 15);
      for (auto a : canonical_subsets(3)) {
        const auto alpha = Antichain::from_sets({a}, 3);
        CHECK(std::abs(isx_redundancy(d, alpha) - mutual_information(d, a)) < 1e-12);
      }
    }
  }

  TEST_CASE("degree of synergy") {
    CHECK(degree_of_synergy(Antichain::parse("{1}{4}{2,3}", 5)) == 1);
    CHECK(degree_of_synergy(Antichain::parse("{1,2}{3,4,5}", 5)) == 2);
    CHECK(degree_of_synergy(Antichain::parse("{1,2,3}", 3)) == 3);
  }

  TEST_CASE("parthood sums reproduce subset mutual information") {
    std::mt19937_64 rng(31);
    for (int n = 2; n <= 4; ++n) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto d = testing::random_joint(rng, n, 3, 2, 20);
        const auto r = analyze(d);
        for (auto a : canonical_subsets(n)) {
          double sum = 0;
          for (std::size_t i = 0; i < r.atoms.size(); ++i) {
            if ((r.lattice->parthood_mask(i) >> a.mask()) & 1) sum += r.atoms[i];
          }
          CHECK(std::abs(sum - mutual_information(d, a)) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("relabelling and source permutation") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 10; ++trial) {
      const auto d = testing::random_joint(rng, 3, 3, 3, 14);
      const auto a = analyze(d);
      const auto b = analyze(scramble(d));
      CHECK(a.total_mi == doctest::Approx(b.total_mi).epsilon(1e-12));
      CHECK(*a.complexity == doctest::Approx(*b.complexity).epsilon(1e-12));
      // Reversing the sources maps {i} to {n+1-i}.
      CHECK(atom(a, "{1}{2,3}") == doctest::Approx(atom(b, "{3}{1,2}")).epsilon(1e-12));
      CHECK(atom(a, "{1}") == doctest::Approx(atom(b, "{3}")).epsilon(1e-12));
    }
  }

  TEST_CASE("misinformative part vanishes for functional sources") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 10; ++trial) {
      const auto d = testing::random_functional_joint(rng, 3, 4, 3);
      const auto r = analyze(d);
      for (double m : r.misinformative) CHECK(std::abs(m) < 1e-12);
    }
  }

  TEST_CASE("informative minus misinformative equals redundancy") {
    const auto d = oracle::irregular3();
    const auto r = analyze(d);
    for (std::size_t i = 0; i < r.atoms.size(); ++i) {
      CHECK(std::abs(r.informative[i] - r.misinformative[i] - r.redundancies[i]) < 1e-12);
      const auto p = isx_parts(d, r.lattice->antichain(i));
      CHECK(std::abs(p.informative - r.informative[i]) < 1e-12);
      CHECK(std::abs(p.misinformative - r.misinformative[i]) < 1e-12);
    }
  }

  TEST_CASE("union weights: agreement transform matches inclusion-exclusion exactly") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
      const auto d = testing::random_joint(rng, 3, 3, 3, 12);
      const auto cache = make_exact_cache(d);
      const auto& lattice = *shared_lattice(3);
      std::vector<Rational> w(cache.width());
      for (std::size_t k = 0; k < d.support_size(); ++k) {
        for (bool with_target : {false, true}) {
          agreement_weights<Rational>(with_target ? cache.joint(k) : cache.source(k), w);
          for (std::size_t i = 0; i < lattice.size(); ++i) {
            CHECK(union_weight_from_agreement<Rational>(w, lattice.parthood_mask(i)) ==
                  union_weight_inclusion_exclusion(cache, k, lattice.antichain(i), with_target));
          }
        }
      }
    }
  }

  TEST_CASE("thread count does not change results") {
    std::mt19937_64 rng(71);
    const auto d = testing::random_real_joint(rng, 4, 3, 3, 60);
    AnalyzeOptions o;
    const auto one = analyze(d, o);
    o.threads = 3;
    const auto three = analyze(d, o);
    CHECK(one.atoms == three.atoms);
    CHECK(one.complexity == three.complexity);
  }

  TEST_CASE("per-label breakdown") {
    SUBCASE("symmetric one-hot encoding gives identical per-label complexity") {
      AnalyzeOptions o;
      o.per_label = true;
      const auto r = analyze(toy_distribution("onehot4"), o);
      REQUIRE(r.per_label.size() == 4);
      for (const auto& e : r.per_label) {
        REQUIRE(e.complexity);
        CHECK(*e.complexity == doctest::Approx(*r.per_label.front().complexity).epsilon(1e-12));
      }
    }
    SUBCASE("T = S1 gives local C = 1 for both labels") {
      const auto d = testing::uniform_points(2, {2}, {{0, {0}}, {1, {1}}});
      AnalyzeOptions o;
      o.per_label = true;
      const auto r = analyze(d, o);
      REQUIRE(r.per_label.size() == 2);
      for (const auto& e : r.per_label) CHECK(*e.complexity == doctest::Approx(1.0));
    }
    SUBCASE("absent labels are excluded and specific information averages to I") {
      const auto d = JointDistribution::from_exact_points(
          3, {2, 2},
          {{0, {0, 0}, Rational(1, 4)}, {2, {0, 1}, Rational(1, 4)}, {2, {1, 0}, Rational(1, 4)},
           {0, {1, 1}, Rational(1, 4)}});
      const auto rows = per_label_breakdown(d, shared_lattice(2));
      REQUIRE(rows.size() == 2);
      CHECK(rows[1].target == 2);
      double avg = 0;
      for (const auto& e : rows) avg += e.probability * e.information;
      CHECK(avg == doctest::Approx(mutual_information(d, IndexSet::full(2))));
    }
  }

  TEST_CASE("size guard") {
    std::mt19937_64 rng(81);
    const auto d = testing::random_joint(rng, 6, 2, 2, 10);
    try {
      analyze(d);
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(e.kind() == error_kind::size_limit);
      CHECK(std::string(e.what()).find("coarse") != std::string::npos);
    }
    AnalyzeOptions o;
    o.max_sources = 3;
    CHECK_THROWS_AS(analyze(testing::random_joint(rng, 4, 2, 2, 10), o), error);
  }

  TEST_CASE("moebius inversion of a hand-built vector") {
    const auto& lattice = *shared_lattice(2);
    std::vector<double> red(4);
    for (std::size_t i = 0; i < 4; ++i) red[i] = lattice.cardinality(i) == 2 ? 0.25 : 1.0;
    const auto atoms = moebius_invert(lattice, red);
    CHECK(atoms[lattice.find(Antichain::parse("{1}{2}", 2)).value()] == doctest::Approx(0.25));
    CHECK(atoms[lattice.find(Antichain::parse("{1}", 2)).value()] == doctest::Approx(0.75));
    CHECK(atoms[lattice.top()] == doctest::Approx(-0.75));
    CHECK_THROWS_AS(moebius_invert(lattice, std::vector<double>(3)), error);
  }

  TEST_CASE("complexity out of range is flagged, not clamped") {
    PidResult r;
    r.n = 2;
    r.complexity = 2.5;
    CHECK(r.complexity_out_of_range());
    r.complexity = 1.5;
    CHECK_FALSE(r.complexity_out_of_range());
  }
}
