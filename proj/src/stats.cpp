#include "notipkit/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "notipkit/errors.hpp"

namespace notip {
namespace {

double ratio_or_signed_inf(double numerator, double scale) {
  if (scale > 0.0) return numerator / scale;
  if (numerator == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), numerator);
}

}  // namespace

void TwoSampleDesign::validate(std::size_t n) const {
  if (labels.size() != n) {
    throw InvalidDesign("two-sample design has " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(n) + " subjects");
  }
  std::size_t ones = 0;
  for (const auto l : labels) {
    if (l > 1) throw InvalidDesign("two-sample labels must be 0 or 1");
    ones += l;
  }
  if (ones < 2 || n - ones < 2) throw InvalidDesign("each two-sample group needs at least 2 members");
}

std::vector<double> one_sample_t(const DataMatrix& data) {
  const std::vector<double> identity(data.subjects(), 1.0);
  return one_sample_t(data, identity);
}

std::vector<double> one_sample_t(const DataMatrix& data, std::span<const double> signs) {
  const std::size_t n = data.subjects();
  const std::size_t m = data.tests();
  if (n < 2) throw InvalidDesign("one-sample t-test needs at least 2 subjects");
  if (signs.size() != n) throw InvalidInput("sign vector length differs from subject count");

  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    const double s = signs[i];
    for (std::size_t j = 0; j < m; ++j) mean[j] += s * row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : mean) v *= inv_n;

  // Constant columns are detected exactly so rounding in the mean cannot fake a tiny variance.
  std::vector<double> ss(m, 0.0);
  std::vector<char> constant(m, 1);
  const auto first = data.row(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = data.row(i);
    const double s = signs[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double x = s * row[j];
      const double d = x - mean[j];
      ss[j] += d * d;
      if (x != signs[0] * first[j]) constant[j] = 0;
    }
  }

  std::vector<double> t(m);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j < m; ++j) {
    if (constant[j]) {
      const double c = signs[0] * first[j];
      t[j] = ratio_or_signed_inf(c, 0.0);
      continue;
    }
    const double sd = std::sqrt(ss[j] / static_cast<double>(n - 1));
    t[j] = ratio_or_signed_inf(mean[j], sd / sqrt_n);
  }
  return t;
}

std::vector<double> two_sample_t(const DataMatrix& data, std::span<const std::uint8_t> labels) {
  const std::size_t n = data.subjects();
  const std::size_t m = data.tests();
  if (labels.size() != n) throw InvalidDesign("label count differs from subject count");
  std::size_t n1 = 0;
  for (const auto l : labels) n1 += (l != 0);
  const std::size_t n0 = n - n1;
  if (n1 < 2 || n0 < 2) throw InvalidDesign("each two-sample group needs at least 2 members");

  std::vector<double> mean0(m, 0.0), mean1(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& acc = labels[i] ? mean1 : mean0;
    const auto row = data.row(i);
    for (std::size_t j = 0; j < m; ++j) acc[j] += row[j];
  }
  for (std::size_t j = 0; j < m; ++j) {
    mean0[j] /= static_cast<double>(n0);
    mean1[j] /= static_cast<double>(n1);
  }
  std::vector<double> ss(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = labels[i] ? mean1 : mean0;
    const auto row = data.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double d = row[j] - mu[j];
      ss[j] += d * d;
    }
  }
  const double dof = static_cast<double>(n - 2);
  const double scale = 1.0 / static_cast<double>(n0) + 1.0 / static_cast<double>(n1);
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double pooled = ss[j] / dof;
    t[j] = ratio_or_signed_inf(mean1[j] - mean0[j], std::sqrt(pooled * scale));
  }
  return t;
}

namespace {
using DoublePolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
}  // namespace

double t_to_pvalue(double stat, double dof, Tail tail) {
  if (!(dof >= 1.0)) throw InvalidParameter("degrees of freedom must be >= 1");
  if (std::isnan(stat)) throw InvalidInput("t statistic is NaN");

  // P(|T| >= |t|) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  double two_sided;
  if (std::isinf(stat)) {
    two_sided = 0.0;
  } else {
    const double x = dof / (dof + stat * stat);
    two_sided = boost::math::ibeta(0.5 * dof, 0.5, x, DoublePolicy{});
  }
  if (tail == Tail::TwoSided) return std::clamp(two_sided, 0.0, 1.0);
  const double half = 0.5 * two_sided;
  const double p = stat >= 0.0 ? half : 1.0 - half;
  return std::clamp(p, 0.0, 1.0);
}

std::vector<double> t_to_pvalues(std::span<const double> stats, double dof, Tail tail) {
  std::vector<double> p(stats.size());
  std::transform(stats.begin(), stats.end(), p.begin(),
                 [&](double s) { return t_to_pvalue(s, dof, tail); });
  return p;
}

}  // namespace notip
