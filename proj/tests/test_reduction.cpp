#include <doctest.h>

#include <cmath>
#include <random>

#include "pidc/error.hpp"
#include "pidc/reduction.hpp"
#include "pidc/toys.hpp"
#include "support/joints.hpp"
#include "support/oracle.hpp"

using namespace pidc;

TEST_SUITE("reduction") {
  TEST_CASE("uniform maps") {
    CHECK(uniform_map(4, 2).assignment() == std::vector<int>{1, 1, 2, 2});
    CHECK(uniform_map(6, 3).assignment() == std::vector<int>{1, 1, 1, 2, 2, 2});
    CHECK_THROWS_AS(uniform_map(5, 2), error);
    CHECK(uniform_map(4, 2).uniform_order() == 2);
    CHECK_FALSE(CoarseGrainMap::parse("1,1,2").uniform_order());
  }

  TEST_CASE("map parsing and validation") {
    const auto m = CoarseGrainMap::parse("2,1,2,1");
    CHECK(m.coarse_n() == 2);
    CHECK(m.preimage(1) == IndexSet::of({2, 4}));
    CHECK(m.preimage(IndexSet::of({1, 2})) == IndexSet::full(4));
    CHECK(m(3) == 2);
    CHECK(m.to_string() == "2,1,2,1");
    CHECK_THROWS_AS(CoarseGrainMap::parse("1,3"), error);
    CHECK_THROWS_AS(CoarseGrainMap::parse("0,1"), error);
    CHECK_THROWS_AS(CoarseGrainMap::parse("1,,2"), error);
    CHECK_THROWS_AS(CoarseGrainMap::parse("a"), error);
  }

  TEST_CASE("random uniform maps are seeded") {
    const auto a = random_uniform_map(8, 2, 9);
    CHECK(a.assignment() == random_uniform_map(8, 2, 9).assignment());
    CHECK(a.uniform_order() == 2);
    CHECK(a.coarse_n() == 4);
  }

  TEST_CASE("coarse-graining packs preimages") {
    const auto d = testing::uniform_points(2, {2, 2, 3, 2},
                                           {{0, {0, 1, 2, 0}}, {1, {1, 1, 0, 1}}, {1, {1, 0, 1, 1}}});
    const auto c = coarse_grain(d, uniform_map(4, 2));
    CHECK(c.n() == 2);
    CHECK(c.source_sizes()[0] == 4);
    CHECK(c.source_sizes()[1] == 6);
    CHECK(c.exact());
    // (S1,S2)=(0,1) -> 1, (S3,S4)=(2,0) -> 4
    CHECK(c.sources(0)[0] == 1);
    CHECK(c.sources(0)[1] == 4);
    CHECK(mutual_information(c, IndexSet::of({1})) ==
          doctest::Approx(mutual_information(d, IndexSet::of({1, 2}))));
    CHECK_THROWS_AS(coarse_grain(d, uniform_map(6, 2)), error);
  }

  TEST_CASE("identity map and single super-source") {
    const auto d = testing::oracle::irregular3();
    const auto same = reduce_coarse(d, CoarseGrainMap::parse("1,2,3"));
    CHECK(same.reduced_complexity == doctest::Approx(testing::oracle::irregular3_complexity).epsilon(1e-12));
    const auto one = reduce_coarse(d, CoarseGrainMap::parse("1,1,1"));
    CHECK(one.reduced_complexity == doctest::Approx(1.0));
    CHECK(one.order == 3);
    CHECK(*one.upper_bound == doctest::Approx(3.0));
  }

  TEST_CASE("bounds on the paired-digit encoding") {
    const auto d = toy_distribution("paired-binary");
    const auto r = verify_bounds(d, 2);
    REQUIRE(r.bounds_hold);
    CHECK(*r.bounds_hold);
    CHECK(r.reduced_complexity <= 1.21);
    CHECK(1.21 <= 2 * r.reduced_complexity);
    CHECK(*r.full_complexity == doctest::Approx(1.2075).epsilon(1e-4));
  }

  TEST_CASE("bounds for a complexity-one representation") {
    const auto r = verify_bounds(toy_distribution("onehot4"), 2);
    CHECK(*r.bounds_hold);
    CHECK(r.reduced_complexity >= 0.5);
    CHECK(r.reduced_complexity <= 1.0 + 1e-9);
  }

  TEST_CASE("bounds hold on random joints") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 30; ++trial) {
      const auto d = testing::random_joint(rng, 4, 3, 2, 20);
      if (mutual_information(d, IndexSet::full(4)) <= 1e-9) continue;
      CHECK(*verify_bounds(d, random_uniform_map(4, 2, trial)).bounds_hold);
    }
    CHECK_THROWS_AS(verify_bounds(testing::oracle::irregular3(), CoarseGrainMap::parse("1,1,2")), error);
  }

  TEST_CASE("atom aggregation identity") {
    std::mt19937_64 rng(111);
    const auto& fine = *shared_lattice(4);
    const auto& coarse = *shared_lattice(2);
    for (int trial = 0; trial < 10; ++trial) {
      const auto d = testing::random_joint(rng, 4, 3, 2, 20);
      const auto map = uniform_map(4, 2);
      const auto f = analyze(d);
      const auto c = analyze(coarse_grain(d, map));
      const auto agg = aggregate_atoms(fine, f.atoms, coarse, map);
      for (std::size_t i = 0; i < agg.size(); ++i) CHECK(std::abs(agg[i] - c.atoms[i]) < 1e-9);
    }
  }

  TEST_CASE("coarse atom targets") {
    const auto& fine = *shared_lattice(2);
    const auto& coarse = *shared_lattice(1);
    const auto t = coarse_atom_targets(fine, coarse, CoarseGrainMap::parse("1,1"));
    for (auto x : t) CHECK(x == 0);
    const auto map = uniform_map(4, 2);
    const auto targets = coarse_atom_targets(*shared_lattice(4), *shared_lattice(2), map);
    const auto& f4 = *shared_lattice(4);
    CHECK(shared_lattice(2)->antichain(targets[*f4.find(Antichain::parse("{1}{3}", 4))]).to_string() == "{1}{2}");
    CHECK(shared_lattice(2)->antichain(targets[*f4.find(Antichain::parse("{1,3}", 4))]).to_string() == "{1,2}");
    CHECK(shared_lattice(2)->antichain(targets[*f4.find(Antichain::parse("{1}{2}", 4))]).to_string() == "{1}");
  }

  TEST_CASE("subsampling") {
    const auto d = testing::oracle::irregular3();
    const auto all = subsample(d, {1, 2, 3});
    CHECK(analyze(all.distribution).atoms == analyze(d).atoms);
    const auto single = reduce_subsample(d, {2});
    CHECK(single.reduced_complexity == doctest::Approx(1.0));
    CHECK(single.warning);

    const auto chain = testing::uniform_points(2, {2, 2, 2}, {{0, {0, 0, 0}}, {1, {1, 1, 1}}});
    CHECK(reduce_subsample(chain, {1, 2}).reduced_complexity == doctest::Approx(1.0));
    CHECK_THROWS_AS(subsample(d, {1, 4}), error);

    std::mt19937_64 rng(5);
    const auto wide = testing::random_joint(rng, 8, 2, 2, 10);
    CHECK_THROWS_AS(subsample(wide, {1, 2, 3, 4, 5, 6}), error);
  }

  TEST_CASE("random index draws") {
    const auto a = random_indices(10, 4, 26);
    CHECK(a == random_indices(10, 4, 26));
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(a.size() == 4);
    CHECK_THROWS_AS(random_indices(3, 4, 1), error);
  }
}
