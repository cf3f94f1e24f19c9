#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "notipkit/matrix.hpp"

namespace notip {

enum class Tail { Upper, TwoSided };

/// Group membership for a two-sample comparison; label 1 is the group whose mean is tested
/// as larger.
struct TwoSampleDesign {
  std::vector<std::uint8_t> labels;

  /// Throws InvalidDesign unless labels are binary, sized n, and each group has >= 2 members.
  void validate(std::size_t n) const;
};

/// Per-column one-sample t statistic mean / (sd / sqrt(n)) with the unbiased sd.
/// Zero-variance columns give 0 (zero mean) or a signed infinity.
std::vector<double> one_sample_t(const DataMatrix& data);

/// Same statistic on the sign-flipped data diag(signs) * X; signs must be +1 or -1.
std::vector<double> one_sample_t(const DataMatrix& data, std::span<const double> signs);

/// Pooled-variance two-sample t statistic, mean(label 1) - mean(label 0), with n - 2 dof.
std::vector<double> two_sample_t(const DataMatrix& data, std::span<const std::uint8_t> labels);

/// Student-t tail probability. Upper: P(T >= stat). TwoSided: P(|T| >= |stat|).
double t_to_pvalue(double stat, double dof, Tail tail = Tail::Upper);

std::vector<double> t_to_pvalues(std::span<const double> stats, double dof, Tail tail = Tail::Upper);

}  // namespace notip
