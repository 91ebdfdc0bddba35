#include <doctest.h>

#include <cmath>
#include <random>

#include "pidc/baselines.hpp"
#include "pidc/error.hpp"
#include "pidc/toys.hpp"
#include "support/joints.hpp"
#include "support/oracle.hpp"

using namespace pidc;
namespace oracle = pidc::testing::oracle;

TEST_SUITE("baselines") {
  TEST_CASE("frozen oracle: directed differences") {
    const auto dd = directed_differences(oracle::irregular3());
    REQUIRE(dd.values.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(dd.values[k] - oracle::irregular3_reing()[k]) < 1e-12);
    CHECK(std::abs(reing_complexity(dd) - oracle::irregular3_reing_complexity) < 1e-12);
  }

  TEST_CASE("telescoping") {
    std::mt19937_64 rng(7);
    for (int n = 1; n <= 6; ++n) {
      const auto d = testing::random_joint(rng, n, 3, 2, 25);
      const auto dd = directed_differences(d);
      double sum = 0;
      for (double v : dd.values) sum += v;
      CHECK(std::abs(sum - mutual_information(d, IndexSet::full(n))) < 1e-9);
    }
  }

  TEST_CASE("copy chain") {
    const auto d = testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {1, {1, 1}}});
    const auto dd = directed_differences(d);
    CHECK(dd.values[0] == doctest::Approx(1.0));
    CHECK(std::abs(dd.values[1]) < 1e-12);
    CHECK(reing_complexity(dd) == doctest::Approx(1.0));
  }

  TEST_CASE("independent target") {
    const auto d = testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {1, {0, 0}}});
    const auto dd = directed_differences(d);
    for (double v : dd.values) CHECK(std::abs(v) < 1e-12);
    try {
      reing_complexity(dd);
      FAIL("expected an error");
    } catch (const error& e) {
      CHECK(e.kind() == error_kind::undefined_complexity);
    }
  }

  TEST_CASE("synthetic extremes") {
    const std::vector<double> top = {0, 0, 0, 1.5};
    CHECK(reing_complexity(top, 1.5) == doctest::Approx(4.0));
    const std::vector<double> bottom = {2.0, 0, 0};
    CHECK(reing_complexity(bottom, 2.0) == doctest::Approx(1.0));
  }

  TEST_CASE("xor pair: directed differences at order two, PID backbone split") {
    const auto d = testing::uniform_points(2, {2, 2}, {{0, {0, 0}}, {1, {0, 1}}, {1, {1, 0}}, {0, {1, 1}}});
    const auto c = compare(d);
    CHECK(std::abs(c.differences[0]) < 1e-12);
    CHECK(c.differences[1] == doctest::Approx(1.0));
    CHECK(*c.reing_complexity == doctest::Approx(2.0));
    CHECK(c.backbone.at(1) == doctest::Approx(std::log2(3.0) - 1));
    CHECK(c.backbone.at(2) == doctest::Approx(2 - std::log2(3.0)));
  }

  TEST_CASE("one-hot: PID mass at order one, directed differences spread") {
    const auto c = compare(toy_distribution("onehot4"));
    CHECK(c.backbone.at(1) == doctest::Approx(c.total_mi));
    CHECK(*c.complexity == doctest::Approx(1.0));
    const double l = 0.75 * std::log2(3.0);
    CHECK(c.differences[0] == doctest::Approx(2 - l));
    CHECK(c.differences[1] == doctest::Approx(l - 0.5));
    CHECK(c.differences[2] == doctest::Approx(0.5));
    CHECK(std::abs(c.differences[3]) < 1e-12);
    CHECK(*c.reing_complexity == doctest::Approx((2 - l + 2 * (l - 0.5) + 1.5) / 2));
  }

  TEST_CASE("toy comparisons share the total") {
    for (const char* name : {"onehot4", "paired-binary", "binary16", "xor8x2"}) {
      const auto c = compare(toy_distribution(name));
      double pid = 0, reing = 0;
      for (const auto& [m, v] : c.backbone) pid += v;
      for (double v : c.differences) reing += v;
      CHECK(pid == doctest::Approx(c.total_mi));
      CHECK(reing == doctest::Approx(c.total_mi));
    }
  }
}
