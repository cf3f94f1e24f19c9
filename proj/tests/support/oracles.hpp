#pragma once

// Slow reference implementations, written straight from the definitions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "notipkit/randomization.hpp"

namespace oracle {

inline std::size_t bound(std::span<const double> subset, std::span<const double> t, std::size_t k_max) {
  const std::size_t s = subset.size();
  if (s == 0) return 0;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 1; k <= std::min(s, k_max); ++k) {
    std::size_t above = 0;
    for (const double p : subset) above += p >= t[k - 1] ? 1 : 0;
    best = std::min(best, above + k - 1);
  }
  return best;
}

struct Region {
  std::size_t size = 0;
  std::size_t v = 0;
};

// Tries every prefix of the p-values in ascending (stable) order.
inline Region region(std::span<const double> p, std::span<const double> t, std::size_t k_max, double q) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  Region best;
  std::vector<double> prefix;
  for (std::size_t s = 1; s <= p.size(); ++s) {
    prefix.push_back(p[order[s - 1]]);
    const std::size_t v = bound(prefix, t, k_max);
    if (static_cast<double>(v) / static_cast<double>(s) <= q) best = {s, v};
  }
  return best;
}

// Largest i with p_(m-i+k) > k alpha / i for every k <= i, checking every i.
inline std::size_t hommel(std::vector<double> p, double alpha) {
  std::sort(p.begin(), p.end());
  const std::size_t m = p.size();
  std::size_t h = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    bool ok = true;
    for (std::size_t k = 1; k <= i && ok; ++k) {
      ok = p[m - i + k - 1] > static_cast<double>(k) * alpha / static_cast<double>(i);
    }
    if (ok) h = i;
  }
  return h;
}

// Rows with some k <= k_max where the k-th smallest p-value is strictly below t_k.
inline std::size_t jer_violations(const notip::NullPValueMatrix& nulls, std::span<const double> t,
                                  std::size_t k_max) {
  std::size_t count = 0;
  for (std::size_t b = 0; b < nulls.rows(); ++b) {
    std::vector<double> row(nulls.row(b).begin(), nulls.row(b).end());
    std::sort(row.begin(), row.end());
    bool hit = false;
    for (std::size_t k = 1; k <= k_max; ++k) hit = hit || row[k - 1] < t[k - 1];
    count += hit ? 1 : 0;
  }
  return count;
}

inline double student_density(double x, double dof) {
  const double c = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * M_PI);
  return std::exp(c - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

// P(T >= t) by composite Simpson on [0, |t|].
inline double student_upper_tail(double t, double dof, int intervals = 20000) {
  const double a = std::abs(t);
  const double h = a / intervals;
  double sum = student_density(0.0, dof) + student_density(a, dof);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * student_density(i * h, dof);
  const double central = sum * h / 3.0;
  return t >= 0.0 ? 0.5 - central : 0.5 + central;
}

}  // namespace oracle
