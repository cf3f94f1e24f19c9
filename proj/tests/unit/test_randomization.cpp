#include <catch_amalgamated.hpp>

#include <algorithm>

#include "generators.hpp"
#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/randomization.hpp"
#include "notipkit/stats.hpp"

using namespace notip;

TEST_CASE("rows are sorted and the first row is the observed data", "[randomization]") {
  testgen::Rng rng(7);
  const DataMatrix x = testgen::gaussian_data(rng, 12, 40, 0.3);
  RandomizationOptions opts;
  opts.B = 25;
  opts.seed = 99;
  const NullPValueMatrix nulls = randomized_pvalue_matrix(x, opts);
  REQUIRE(nulls.rows() == 25);
  REQUIRE(nulls.tests() == 40);
  for (std::size_t b = 0; b < nulls.rows(); ++b) {
    const auto row = nulls.row(b);
    REQUIRE(std::is_sorted(row.begin(), row.end()));
  }
  auto observed = observed_pvalues(x, opts);
  std::sort(observed.begin(), observed.end());
  const auto first = nulls.row(0);
  REQUIRE(std::equal(observed.begin(), observed.end(), first.begin()));
}

TEST_CASE("without identity the first row is a random flip", "[randomization]") {
  testgen::Rng rng(8);
  const DataMatrix x = testgen::gaussian_data(rng, 10, 30, 1.0);
  RandomizationOptions opts;
  opts.B = 3;
  opts.include_identity = false;
  auto observed = observed_pvalues(x, opts);
  std::sort(observed.begin(), observed.end());
  const auto first = randomized_pvalue_matrix(x, opts).row(0);
  REQUIRE_FALSE(std::equal(observed.begin(), observed.end(), first.begin()));
}

TEST_CASE("same seed gives the same matrix whatever the thread count", "[randomization]") {
  testgen::Rng rng(9);
  const DataMatrix x = testgen::gaussian_data(rng, 8, 50);
  RandomizationOptions opts;
  opts.B = 64;
  opts.seed = 1234;
  set_thread_count(1);
  const auto a = randomized_pvalue_matrix(x, opts);
  set_thread_count(4);
  const auto b = randomized_pvalue_matrix(x, opts);
  set_thread_count(0);
  REQUIRE(a == b);
  opts.seed = 1235;
  REQUIRE_FALSE(randomized_pvalue_matrix(x, opts) == a);
}

TEST_CASE("sign-flip null p-values are uniform for symmetric data", "[randomization]") {
  // Kolmogorov-Smirnov distance of a fixed column over many flips of one symmetric dataset.
  testgen::Rng rng(10);
  const DataMatrix x = testgen::gaussian_data(rng, 20, 1);
  RandomizationOptions opts;
  opts.B = 4000;
  opts.seed = 5;
  opts.include_identity = false;
  const auto nulls = randomized_pvalue_matrix(x, opts);
  std::vector<double> p(nulls.values().begin(), nulls.values().end());
  std::sort(p.begin(), p.end());
  double d = 0.0;
  const double n = static_cast<double>(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    d = std::max({d, (i + 1) / n - p[i], p[i] - i / n});
  }
  // flips of one dataset give a discrete law close to uniform; 1.95 / sqrt(n) is the 0.1% KS level
  REQUIRE(d < 1.95 / std::sqrt(n) + 0.02);
}

TEST_CASE("two-sample design permutes labels", "[randomization]") {
  testgen::Rng rng(11);
  const DataMatrix x = testgen::gaussian_data(rng, 10, 15);
  RandomizationOptions opts;
  opts.B = 20;
  opts.two_sample = TwoSampleDesign{{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}};
  const auto nulls = randomized_pvalue_matrix(x, opts);
  REQUIRE(nulls.design() == Design::TwoSample);
  REQUIRE(design_dof(x, opts) == 8.0);
  auto observed = t_to_pvalues(two_sample_t(x, opts.two_sample->labels), 8.0);
  std::sort(observed.begin(), observed.end());
  REQUIRE(std::equal(observed.begin(), observed.end(), nulls.row(0).begin()));
}

TEST_CASE("randomization input validation", "[randomization]") {
  testgen::Rng rng(12);
  const DataMatrix x = testgen::gaussian_data(rng, 4, 3);
  RandomizationOptions opts;
  opts.B = 0;
  REQUIRE_THROWS_AS(randomized_pvalue_matrix(x, opts), InvalidParameter);
  REQUIRE_THROWS_AS(DataMatrix(1, 3, {1.0, 2.0, 3.0}), InvalidDesign);
  REQUIRE_THROWS_AS(NullPValueMatrix(1, 2, {0.5, 0.1}), InvalidInput);
  REQUIRE_THROWS_AS(NullPValueMatrix(1, 2, {0.1, 1.5}), InvalidInput);
}
