#include "notipkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/rng.hpp"

namespace notip {

GroundTruth generate_ground_truth(const GridDims& dims, double pi0, std::uint64_t seed) {
  dims.validate();
  if (!(pi0 > 0.0 && pi0 <= 1.0)) throw InvalidParameter("pi0 must lie in (0,1]");
  const std::size_t m = dims.voxel_count();
  const auto m1 = static_cast<std::size_t>(std::llround((1.0 - pi0) * static_cast<double>(m)));

  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Engine rng = make_engine(seed, {stream::kGroundTruth});
  for (std::size_t i = 0; i < m1; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  GroundTruth t;
  t.dims = dims;
  t.mask.assign(m, 0);
  for (std::size_t i = 0; i < m1; ++i) t.mask[idx[i]] = 1;
  t.signal_count = m1;
  t.null_count = m - m1;
  return t;
}

double fwhm_to_sigma(double fwhm) {
  if (!(fwhm >= 0.0)) throw InvalidParameter("fwhm must be >= 0");
  return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

namespace {

struct AxisKernel {
  std::vector<double> weights;  // w(d), d = -radius..radius
  std::size_t radius = 0;
  std::vector<double> norm;     // per position: sqrt(sum (w / W)^2) of the truncated kernel
};

AxisKernel make_axis_kernel(std::size_t extent, double sigma) {
  AxisKernel k;
  k.radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
  k.weights.resize(2 * k.radius + 1);
  for (std::size_t i = 0; i < k.weights.size(); ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(k.radius);
    k.weights[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  k.norm.resize(extent);
  for (std::size_t x = 0; x < extent; ++x) {
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < k.weights.size(); ++i) {
      const auto pos = static_cast<long long>(x) + static_cast<long long>(i) - static_cast<long long>(k.radius);
      if (pos < 0 || pos >= static_cast<long long>(extent)) continue;
      sum += k.weights[i];
      sum_sq += k.weights[i] * k.weights[i];
    }
    k.norm[x] = std::sqrt(sum_sq) / sum;
  }
  return k;
}

}  // namespace

void smooth_unit_variance(std::span<double> field, const GridDims& dims, double sigma) {
  dims.validate();
  if (field.size() != dims.voxel_count()) throw InvalidInput("field size does not match grid dims");
  if (!(sigma >= 0.0)) throw InvalidParameter("sigma must be >= 0");
  if (sigma == 0.0) return;

  const std::size_t rank = dims.rank();
  std::vector<double> line, out;
  for (std::size_t axis = 0; axis < rank; ++axis) {
    const std::size_t extent = dims.extent[axis];
    const AxisKernel kernel = make_axis_kernel(extent, sigma);
    std::size_t stride = 1;
    for (std::size_t a = axis + 1; a < rank; ++a) stride *= dims.extent[a];
    const std::size_t outer = field.size() / (extent * stride);
    line.resize(extent);
    out.resize(extent);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t s = 0; s < stride; ++s) {
        const std::size_t base = o * extent * stride + s;
        for (std::size_t x = 0; x < extent; ++x) line[x] = field[base + x * stride];
        for (std::size_t x = 0; x < extent; ++x) {
          double acc = 0.0, wsum = 0.0;
          for (std::size_t i = 0; i < kernel.weights.size(); ++i) {
            const auto pos = static_cast<long long>(x) + static_cast<long long>(i) -
                             static_cast<long long>(kernel.radius);
            if (pos < 0 || pos >= static_cast<long long>(extent)) continue;
            acc += kernel.weights[i] * line[static_cast<std::size_t>(pos)];
            wsum += kernel.weights[i];
          }
          out[x] = acc / wsum / kernel.norm[x];
        }
        for (std::size_t x = 0; x < extent; ++x) field[base + x * stride] = out[x];
      }
    }
  }
}

DataMatrix simulate_dataset(const GroundTruth& truth, std::size_t n, double fwhm, double amplitude,
                            std::uint64_t seed) {
  if (!std::isfinite(amplitude)) throw InvalidParameter("amplitude must be finite");
  const std::size_t m = truth.mask.size();
  if (m != truth.dims.voxel_count()) throw InvalidInput("ground truth mask does not match its grid");
  const double sigma = fwhm_to_sigma(fwhm);

  std::vector<double> values(n * m);
  parallel_for(n, [&](std::size_t i) {
    Engine rng = make_engine(seed, {i});
    std::normal_distribution<double> normal(0.0, 1.0);
    std::span<double> subject(values.data() + i * m, m);
    for (auto& v : subject) v = normal(rng);
    smooth_unit_variance(subject, truth.dims, sigma);
    for (std::size_t j = 0; j < m; ++j) {
      if (truth.mask[j]) subject[j] += amplitude;
    }
  });
  return DataMatrix(n, m, std::move(values));
}

MethodMetrics evaluate_run(std::span<const std::size_t> region, const GroundTruth& truth, std::size_t v) {
  MethodMetrics r;
  r.region_size = region.size();
  r.false_positive_bound = v;
  std::size_t nulls = 0;
  for (const auto i : region) {
    if (i >= truth.mask.size()) throw InvalidInput("region index outside the grid");
    if (truth.mask[i]) {
      ++r.true_positives;
    } else {
      ++nulls;
    }
  }
  r.fdp = static_cast<double>(nulls) / static_cast<double>(std::max<std::size_t>(region.size(), 1));
  if (truth.signal_count == 0) {
    r.tpr = 0.0;
    r.degenerate = !region.empty();
  } else {
    const std::size_t guaranteed = region.size() >= v ? region.size() - v : 0;
    r.tpr = static_cast<double>(guaranteed) / static_cast<double>(truth.signal_count);
  }
  return r;
}

}  // namespace notip
