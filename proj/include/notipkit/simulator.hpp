#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "notipkit/clusters.hpp"
#include "notipkit/matrix.hpp"

namespace notip {

struct GroundTruth {
  GridDims dims;
  /// 1 marks a signal voxel (H1), 0 a null voxel (H0).
  std::vector<std::uint8_t> mask;
  std::size_t null_count = 0;
  std::size_t signal_count = 0;
};

/// Exactly round((1 - pi0) * m) signal voxels drawn uniformly without replacement.
GroundTruth generate_ground_truth(const GridDims& dims, double pi0, std::uint64_t seed);

/// sigma = fwhm / (2 sqrt(2 ln 2)).
double fwhm_to_sigma(double fwhm);

/// Separable Gaussian smoothing in place. The kernel is truncated at ceil(4 sigma) and at the
/// grid edge, and each output voxel is rescaled so white noise of unit variance stays at unit
/// marginal variance. sigma = 0 leaves the field untouched.
void smooth_unit_variance(std::span<double> field, const GridDims& dims, double sigma);

/// n subjects, each amplitude * mask + smoothed unit-variance Gaussian noise, flattened to n x m.
/// Subject i draws its noise from the stream (seed, i).
DataMatrix simulate_dataset(const GroundTruth& truth, std::size_t n, double fwhm, double amplitude,
                            std::uint64_t seed);

struct MethodMetrics {
  std::string method;
  std::size_t region_size = 0;
  std::size_t false_positive_bound = 0;
  std::size_t true_positives = 0;
  double fdp = 0.0;
  double tpr = 0.0;
  /// |H1| = 0 with a non-empty region: TPR is undefined and reported as 0.
  bool degenerate = false;
};

/// FDP = |R n H0| / max(|R|, 1); TPR = (|R| - V) / |H1|.
MethodMetrics evaluate_run(std::span<const std::size_t> region, const GroundTruth& truth, std::size_t v);

}  // namespace notip
