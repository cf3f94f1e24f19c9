#include "notipkit/randomization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/rng.hpp"

namespace notip {

NullPValueMatrix::NullPValueMatrix(std::size_t B, std::size_t m, std::vector<double> values,
                                   std::uint64_t seed, Design design, bool include_identity)
    : B_(B), m_(m), values_(std::move(values)), seed_(seed), design_(design),
      include_identity_(include_identity) {
  if (B_ == 0 || m_ == 0) throw InvalidInput("null p-value matrix must be non-empty");
  if (values_.size() != B_ * m_) throw InvalidInput("null p-value matrix shape mismatch");
  for (std::size_t b = 0; b < B_; ++b) {
    const auto r = row(b);
    for (std::size_t k = 0; k < m_; ++k) {
      if (!(r[k] >= 0.0 && r[k] <= 1.0)) {
        throw InvalidInput("p-value outside [0,1] at row " + std::to_string(b) + ", column " +
                           std::to_string(k));
      }
      if (k > 0 && r[k] < r[k - 1]) {
        throw InvalidInput("row " + std::to_string(b) + " of null p-value matrix is not sorted");
      }
    }
  }
}

double design_dof(const DataMatrix& data, const RandomizationOptions& opts) {
  const double n = static_cast<double>(data.subjects());
  return opts.two_sample ? n - 2.0 : n - 1.0;
}

std::vector<double> observed_statistics(const DataMatrix& data, const RandomizationOptions& opts) {
  if (opts.two_sample) {
    opts.two_sample->validate(data.subjects());
    return two_sample_t(data, opts.two_sample->labels);
  }
  return one_sample_t(data);
}

std::vector<double> observed_pvalues(const DataMatrix& data, const RandomizationOptions& opts) {
  return t_to_pvalues(observed_statistics(data, opts), design_dof(data, opts), opts.tail);
}

NullPValueMatrix randomized_pvalue_matrix(const DataMatrix& data, const RandomizationOptions& opts) {
  if (opts.B < 1) throw InvalidParameter("randomization count B must be >= 1");
  const std::size_t n = data.subjects();
  const std::size_t m = data.tests();
  if (n < 2) throw InvalidDesign("randomization needs at least 2 subjects");
  if (opts.two_sample) opts.two_sample->validate(n);
  const double dof = design_dof(data, opts);

  std::vector<double> values(opts.B * m);
  parallel_for(opts.B, [&](std::size_t b) {
    std::vector<double> stats;
    const bool identity = opts.include_identity && b == 0;
    if (opts.two_sample) {
      std::vector<std::uint8_t> labels = opts.two_sample->labels;
      if (!identity) {
        Engine rng = make_engine(opts.seed, {b});
        std::shuffle(labels.begin(), labels.end(), rng);
      }
      stats = two_sample_t(data, labels);
    } else {
      std::vector<double> signs(n, 1.0);
      if (!identity) {
        Engine rng = make_engine(opts.seed, {b});
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i % 64 == 0) bits = rng();
          signs[i] = (bits & 1u) ? -1.0 : 1.0;
          bits >>= 1;
        }
      }
      stats = one_sample_t(data, signs);
    }
    double* out = values.data() + b * m;
    for (std::size_t j = 0; j < m; ++j) out[j] = t_to_pvalue(stats[j], dof, opts.tail);
    std::sort(out, out + m);
  });

  const Design design = opts.two_sample ? Design::TwoSample : Design::OneSample;
  return NullPValueMatrix(opts.B, m, std::move(values), opts.seed, design, opts.include_identity);
}

}  // namespace notip
