#include <catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "notipkit/errors.hpp"
#include "notipkit/simulator.hpp"

using namespace notip;

TEST_CASE("ground truth has the requested number of signal voxels", "[simulator]") {
  const auto t = generate_ground_truth(GridDims{{10, 10}}, 0.9, 3);
  REQUIRE(t.signal_count == 10);
  REQUIRE(t.null_count == 90);
  std::size_t ones = 0;
  for (const auto v : t.mask) ones += v;
  REQUIRE(ones == 10);
  REQUIRE(generate_ground_truth(GridDims{{10, 10}}, 0.9, 3).mask == t.mask);
  REQUIRE_FALSE(generate_ground_truth(GridDims{{10, 10}}, 0.9, 4).mask == t.mask);
  REQUIRE(generate_ground_truth(GridDims{{10, 10, 10}}, 1.0, 3).signal_count == 0);
  REQUIRE(generate_ground_truth(GridDims{{7}}, 0.5, 1).signal_count == 4);  // round(3.5)
  REQUIRE_THROWS_AS(generate_ground_truth(GridDims{{7}}, 0.0, 1), InvalidParameter);
}

TEST_CASE("signal locations are spread uniformly", "[simulator]") {
  std::vector<int> hits(20, 0);
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const auto t = generate_ground_truth(GridDims{{20}}, 0.75, s);
    for (std::size_t i = 0; i < 20; ++i) hits[i] += t.mask[i];
  }
  // each voxel is signal with probability 1/4; 500 expected, sd about 19
  for (const int h : hits) REQUIRE(std::abs(h - 500) < 100);
}

TEST_CASE("fwhm conversion", "[simulator]") {
  REQUIRE_THAT(fwhm_to_sigma(4.0), Catch::Matchers::WithinRel(4.0 / 2.3548200450309493, 1e-14));
  REQUIRE(fwhm_to_sigma(0.0) == 0.0);
}

TEST_CASE("zero fwhm leaves white noise and zero amplitude leaves pure noise", "[simulator]") {
  const auto t = generate_ground_truth(GridDims{{30, 30}}, 0.5, 1);
  const auto a = simulate_dataset(t, 40, 0.0, 0.0, 9);
  double lag = 0.0, var = 0.0, mean_signal = 0.0;
  std::size_t n_signal = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t y = 0; y < 30; ++y) {
      for (std::size_t x = 0; x + 1 < 30; ++x) {
        lag += a(i, x * 30 + y) * a(i, (x + 1) * 30 + y);
        var += a(i, x * 30 + y) * a(i, x * 30 + y);
      }
    }
    for (std::size_t j = 0; j < 900; ++j) {
      if (t.mask[j]) {
        mean_signal += a(i, j);
        ++n_signal;
      }
    }
  }
  REQUIRE(std::abs(lag / var) < 0.03);
  REQUIRE(std::abs(mean_signal / n_signal) < 0.03);
  const auto b = simulate_dataset(t, 40, 0.0, 2.0, 9);
  for (std::size_t j = 0; j < 900; ++j) {
    REQUIRE_THAT(b(3, j) - a(3, j), Catch::Matchers::WithinAbs(t.mask[j] ? 2.0 : 0.0, 1e-12));
  }
}

TEST_CASE("smoothed noise has unit variance and Gaussian-kernel autocorrelation", "[simulator]") {
  // Away from edges the correlation at lag d is exp(-d^2 / (4 sigma^2)).
  const GridDims dims{{40, 40}};
  const auto t = generate_ground_truth(dims, 1.0, 0);
  const double fwhm = 3.0;
  const double sigma = fwhm_to_sigma(fwhm);
  const auto data = simulate_dataset(t, 300, fwhm, 0.0, 17);
  const std::size_t lo = 12, hi = 28;
  for (const std::size_t d : {1u, 2u, 3u}) {
    double cross = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.subjects(); ++i) {
      for (std::size_t x = lo; x < hi; ++x) {
        for (std::size_t y = lo; y < hi; ++y) {
          const double u = data(i, dims.linear({x, y, 0})), v = data(i, dims.linear({x + d, y, 0}));
          cross += u * v;
          sq += u * u;
          ++count;
        }
      }
    }
    const double expected = std::exp(-static_cast<double>(d * d) / (4.0 * sigma * sigma));
    INFO("lag " << d);
    REQUIRE_THAT(cross / sq, Catch::Matchers::WithinAbs(expected, 0.03));
    REQUIRE_THAT(sq / count, Catch::Matchers::WithinAbs(1.0, 0.05));
  }
}

TEST_CASE("edge voxels keep unit variance", "[simulator]") {
  const GridDims dims{{10, 10, 10}};
  const auto t = generate_ground_truth(dims, 1.0, 0);
  const auto data = simulate_dataset(t, 2000, 4.0, 0.0, 5);
  for (const std::size_t j : {std::size_t{0}, dims.linear({0, 5, 9}), dims.linear({5, 5, 5})}) {
    double sq = 0.0;
    for (std::size_t i = 0; i < data.subjects(); ++i) sq += data(i, j) * data(i, j);
    REQUIRE_THAT(sq / data.subjects(), Catch::Matchers::WithinAbs(1.0, 0.1));
  }
}

TEST_CASE("dataset draws are deterministic", "[simulator]") {
  const auto t = generate_ground_truth(GridDims{{6, 6, 6}}, 0.9, 2);
  REQUIRE(simulate_dataset(t, 5, 2.0, 1.0, 3) == simulate_dataset(t, 5, 2.0, 1.0, 3));
  REQUIRE_FALSE(simulate_dataset(t, 5, 2.0, 1.0, 3) == simulate_dataset(t, 5, 2.0, 1.0, 4));
}

TEST_CASE("run evaluation matches set arithmetic", "[simulator]") {
  GroundTruth t;
  t.dims = GridDims{{8}};
  t.mask = {1, 1, 1, 0, 0, 0, 0, 1};
  t.signal_count = 4;
  t.null_count = 4;

  auto m = evaluate_run(std::vector<std::size_t>{0, 1, 2, 7}, t, 0);
  REQUIRE(m.fdp == 0.0);
  REQUIRE(m.tpr == 1.0);
  m = evaluate_run(std::vector<std::size_t>{}, t, 0);
  REQUIRE(m.fdp == 0.0);
  REQUIRE(m.tpr == 0.0);
  m = evaluate_run(std::vector<std::size_t>{0, 3, 4, 7, 5}, t, 2);
  // region n H0 = {3, 4, 5}
  REQUIRE(m.true_positives == 2);
  REQUIRE(m.fdp == 3.0 / 5.0);
  REQUIRE(m.tpr == (5.0 - 2.0) / 4.0);
  REQUIRE(m.region_size == 5);
  REQUIRE_THROWS_AS(evaluate_run(std::vector<std::size_t>{8}, t, 0), InvalidInput);

  GroundTruth null_world = generate_ground_truth(GridDims{{5}}, 1.0, 0);
  m = evaluate_run(std::vector<std::size_t>{1}, null_world, 1);
  REQUIRE(m.degenerate);
  REQUIRE(m.tpr == 0.0);
  REQUIRE(m.fdp == 1.0);
}
