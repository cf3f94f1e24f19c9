#include <catch_amalgamated.hpp>

#include <sstream>

#include "generators.hpp"
#include "notipkit/errors.hpp"
#include "notipkit/templates.hpp"

using namespace notip;

TEST_CASE("Simes thresholds", "[templates]") {
  REQUIRE(simes_threshold(0.05, 3, 100) == 0.05 * 3.0 / 100.0);
  REQUIRE(simes_threshold(500.0, 3, 100) == 1.0);
  const auto f = simes_family(10, 0.5, 4);
  REQUIRE(f.size() == 4);
  REQUIRE(f[3] == 0.5 * 4.0 / 10.0);
  REQUIRE_THROWS_AS(simes_family(10, 0.5, 11), InvalidParameter);
  REQUIRE_THROWS_AS(simes_family(10, -0.1, 3), InvalidParameter);
}

TEST_CASE("threshold family validation and truncation", "[templates]") {
  REQUIRE_THROWS_AS(ThresholdFamily({0.1, 0.05}), InvalidInput);
  REQUIRE_THROWS_AS(ThresholdFamily({0.1, 1.2}), InvalidInput);
  const ThresholdFamily f({0.01, 0.02, 0.03}, "x");
  REQUIRE(f.truncated(2).size() == 2);
  REQUIRE(f.truncated(2).provenance() == "x");
  REQUIRE_THROWS_AS(f.truncated(4), InvalidParameter);
}

TEST_CASE("learned curves are the column order statistics", "[templates]") {
  testgen::Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t B = testgen::pick(rng, 1, 40);
    const std::size_t m = testgen::pick(rng, 1, 30);
    const std::size_t k_max = testgen::pick(rng, 1, m);
    const auto nulls = testgen::null_matrix(rng, B, m);
    const auto tpl = learn_template(nulls, k_max);
    REQUIRE(tpl.curve_count() == B);
    for (std::size_t k = 1; k <= k_max; ++k) {
      std::vector<double> column;
      for (std::size_t b = 0; b < B; ++b) column.push_back(nulls.row(b)[k - 1]);
      std::sort(column.begin(), column.end());
      for (std::size_t b = 1; b <= B; ++b) REQUIRE(tpl.curve(b)[k - 1] == column[b - 1]);
    }
  }
}

TEST_CASE("learned template validation", "[templates]") {
  REQUIRE_THROWS_AS(LearnedTemplate(2, 3, 2, {0.1, 0.05, 0.2, 0.3}), InvalidInput);
  REQUIRE_THROWS_AS(LearnedTemplate(2, 3, 2, {0.1, 0.2, 0.05, 0.3}), InvalidInput);
  REQUIRE_THROWS_AS(LearnedTemplate(1, 1, 2, {0.1, 0.2}), InvalidInput);
  REQUIRE_NOTHROW(LearnedTemplate(2, 3, 2, {0.1, 0.2, 0.1, 0.3}));
}

TEST_CASE("template binary round trip", "[templates]") {
  testgen::Rng rng(22);
  const auto tpl = learn_template(testgen::null_matrix(rng, 17, 12), 5);
  std::stringstream buf;
  write_template(buf, tpl);
  REQUIRE(buf.str().size() == 8 + 4 + 24 + 17 * 5 * 8);
  REQUIRE(read_template(buf) == tpl);
}

TEST_CASE("template decoding errors", "[templates]") {
  testgen::Rng rng(23);
  const auto tpl = learn_template(testgen::null_matrix(rng, 4, 6), 3);
  std::stringstream buf;
  write_template(buf, tpl);
  const std::string good = buf.str();

  SECTION("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    std::istringstream in(bad);
    REQUIRE_THROWS_AS(read_template(in), FormatError);
  }
  SECTION("future version") {
    std::string bad = good;
    bad[8] = 2;
    std::istringstream in(bad);
    try {
      read_template(in);
      FAIL("no exception");
    } catch (const UnsupportedVersion& e) {
      REQUIRE(e.found() == 2);
      REQUIRE(e.offset() == 8);
    }
  }
  SECTION("truncated payload") {
    std::istringstream in(good.substr(0, good.size() - 5));
    REQUIRE_THROWS_AS(read_template(in), FormatError);
  }
  SECTION("trailing bytes") {
    std::istringstream in(good + "x");
    REQUIRE_THROWS_AS(read_template(in), FormatError);
  }
  SECTION("k_max above m") {
    std::string bad = good;
    bad[28] = 9;  // k_max low byte
    std::istringstream in(bad);
    REQUIRE_THROWS_AS(read_template(in), FormatError);
  }
}

TEST_CASE("template CSV export", "[templates]") {
  const LearnedTemplate tpl(4, 3, 2, {0.1, 0.2, 0.2, 0.3, 0.3, 0.4, 0.5, 0.6});
  std::ostringstream all;
  export_template_csv(all, tpl);
  std::istringstream lines(all.str());
  std::string line;
  std::getline(lines, line);
  REQUIRE(line == "curve,quantile,k,threshold");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  REQUIRE(rows == 8);

  std::ostringstream two;
  export_template_csv(two, tpl, 2);
  REQUIRE(two.str().find("\n4,1,") != std::string::npos);
  REQUIRE(two.str().find("\n2,0.5,") != std::string::npos);
}
