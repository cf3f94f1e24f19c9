#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "notipkit/calibration.hpp"
#include "notipkit/templates.hpp"

namespace notip {

/// A region S: distinct 0-based test indices and the p-values at those indices.
struct VoxelSubset {
  std::vector<std::size_t> indices;
  std::vector<double> p_values;
};

/// Gathers p-values for the given indices; throws InvalidInput on duplicates or out-of-range.
VoxelSubset make_subset(std::span<const double> all_pvalues, std::vector<std::size_t> indices);

struct BoundReport {
  std::size_t size = 0;
  /// Upper bound on the number of false positives in S.
  std::size_t false_positives = 0;
  double fdp_bound = 0.0;
  double tdp_bound = 0.0;
  std::string method;
  double alpha = 0.0;
  bool empty = false;
  bool degenerate = false;
};

nlohmann::json to_json(const BoundReport& report);

BoundReport make_report(std::size_t size, std::size_t v, std::string method, double alpha);

/// min over k = 1..min(|S|, k_max) of #{i in S : p_i >= t_k} + k - 1. Sort-then-scan,
/// O(|S| log |S| + k_max). Empty S gives 0.
std::size_t false_positive_bound(std::span<const double> subset_pvalues, const ThresholdFamily& family,
                                 std::size_t k_max);

struct RegionResult {
  std::size_t size = 0;
  /// Largest p-value in the region; 0 for an empty region.
  double cutoff = 0.0;
  /// Region members in ascending p-value order (ties by index).
  std::vector<std::size_t> indices;
  BoundReport report;
};

/// Largest s such that the s smallest p-values have false_positive_bound / s <= q.
/// One pass over the sorted p-values after an O(m log m) sort.
RegionResult largest_controlled_region(std::span<const double> all_pvalues, const ThresholdFamily& family,
                                       double q, std::size_t k_max);

/// Largest i in [0, m] with p_(m-i+k) > k * alpha / i for all k = 1..i. Input must be sorted
/// ascending. Uses binary search over i; the qualifying set is {0, ..., h}.
std::size_t hommel_value(std::span<const double> sorted_pvalues, double alpha);

/// (min(1, alpha * k / h))_{k=1..length}; requires h >= 1.
ThresholdFamily ari_thresholds(double alpha, std::size_t h, std::size_t length);

/// ARI as a calibrated family over all m ranks (k_max = m), with the Hommel value recorded.
/// h = 0 yields an all-ones family flagged degenerate; its bound is defined as 0.
CalibratedFamily ari_family(std::span<const double> all_pvalues, double alpha);

/// ARI bound on S with thresholds alpha * k / h, k up to m. h = 0 gives V = 0, flagged.
BoundReport ari_bound(const VoxelSubset& subset, double alpha, std::size_t m, std::size_t h);

/// FDP / TDP bounds of S under a calibrated family, using its k_max.
BoundReport tdp_on_subset(std::span<const double> subset_pvalues, const CalibratedFamily& family);
BoundReport tdp_on_subset(const VoxelSubset& subset, const CalibratedFamily& family);

/// Largest region controlled under a calibrated family (handles the degenerate ARI case).
RegionResult largest_controlled_region(std::span<const double> all_pvalues, const CalibratedFamily& family,
                                       double q);

/// Benjamini-Hochberg step-up region at level q: the k* smallest p-values, k* the largest k
/// with p_(k) <= q k / m.
RegionResult bh_region(std::span<const double> all_pvalues, double q);

}  // namespace notip
