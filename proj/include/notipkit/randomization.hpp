#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "notipkit/matrix.hpp"
#include "notipkit/stats.hpp"

namespace notip {

enum class Design { OneSample, TwoSample };

struct RandomizationOptions {
  std::size_t B = 1000;
  std::uint64_t seed = 0;
  /// Row 0 uses the identity transformation (observed data) instead of a random draw.
  bool include_identity = true;
  Tail tail = Tail::Upper;
  /// Set for label-permutation (two-sample) randomization; empty means sign-flipping.
  std::optional<TwoSampleDesign> two_sample;
};

/// B x m matrix of randomized p-values, each row sorted ascending.
class NullPValueMatrix {
 public:
  NullPValueMatrix() = default;
  /// Validates entries in [0, 1] and row sortedness; throws InvalidInput otherwise.
  NullPValueMatrix(std::size_t B, std::size_t m, std::vector<double> values, std::uint64_t seed = 0,
                   Design design = Design::OneSample, bool include_identity = false);

  std::size_t rows() const noexcept { return B_; }
  std::size_t tests() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Design design() const noexcept { return design_; }
  bool include_identity() const noexcept { return include_identity_; }

  std::span<const double> row(std::size_t b) const noexcept { return {values_.data() + b * m_, m_}; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const NullPValueMatrix&, const NullPValueMatrix&) = default;

 private:
  std::size_t B_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
  std::uint64_t seed_ = 0;
  Design design_ = Design::OneSample;
  bool include_identity_ = false;
};

/// Test statistics of the unmodified data under the chosen design.
std::vector<double> observed_statistics(const DataMatrix& data, const RandomizationOptions& opts);

/// p-values of the unmodified data (unsorted, one per test).
std::vector<double> observed_pvalues(const DataMatrix& data, const RandomizationOptions& opts);

/// Degrees of freedom used for the t to p conversion under the design.
double design_dof(const DataMatrix& data, const RandomizationOptions& opts);

/// Row b draws a uniform sign vector (or label permutation) from the stream (seed, b),
/// recomputes the statistics and sorts the resulting p-values. Rows are generated in
/// parallel; the output does not depend on the thread count.
NullPValueMatrix randomized_pvalue_matrix(const DataMatrix& data, const RandomizationOptions& opts);

}  // namespace notip
