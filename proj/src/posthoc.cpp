#include "notipkit/posthoc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "notipkit/errors.hpp"

namespace notip {
namespace {

std::vector<std::size_t> order_by_pvalue(std::span<const double> p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  return order;
}

void check_pvalues(std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) {
      throw InvalidInput("p-value outside [0,1] at index " + std::to_string(i));
    }
  }
}

}  // namespace

VoxelSubset make_subset(std::span<const double> all_pvalues, std::vector<std::size_t> indices) {
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("subset indices are not distinct");
  }
  if (!sorted.empty() && sorted.back() >= all_pvalues.size()) {
    throw InvalidInput("subset index " + std::to_string(sorted.back()) + " out of range");
  }
  VoxelSubset s;
  s.p_values.reserve(indices.size());
  for (const auto i : indices) s.p_values.push_back(all_pvalues[i]);
  s.indices = std::move(indices);
  return s;
}

BoundReport make_report(std::size_t size, std::size_t v, std::string method, double alpha) {
  BoundReport r;
  r.size = size;
  r.false_positives = v;
  r.method = std::move(method);
  r.alpha = alpha;
  r.empty = size == 0;
  if (size > 0) {
    r.fdp_bound = static_cast<double>(v) / static_cast<double>(size);
    r.tdp_bound = 1.0 - r.fdp_bound;
  }
  return r;
}

nlohmann::json to_json(const BoundReport& r) {
  return {{"size", r.size},          {"false_positive_bound", r.false_positives},
          {"fdp_bound", r.fdp_bound}, {"tdp_bound", r.tdp_bound},
          {"method", r.method},       {"alpha", r.alpha},
          {"empty", r.empty},         {"degenerate", r.degenerate}};
}

std::size_t false_positive_bound(std::span<const double> subset_pvalues, const ThresholdFamily& family,
                                 std::size_t k_max) {
  if (k_max < 1) throw InvalidParameter("k_max must be >= 1");
  if (k_max > family.size()) throw InvalidInput("k_max exceeds the threshold family length");
  const std::size_t s = subset_pvalues.size();
  if (s == 0) return 0;

  std::vector<double> p(subset_pvalues.begin(), subset_pvalues.end());
  std::sort(p.begin(), p.end());
  const std::size_t K = std::min(s, k_max);
  std::size_t below = 0;  // #{p < t_k}, non-decreasing since t is
  std::size_t best = s;
  for (std::size_t k = 1; k <= K; ++k) {
    const double t = family[k - 1];
    while (below < s && p[below] < t) ++below;
    best = std::min(best, (s - below) + k - 1);
  }
  return best;
}

RegionResult largest_controlled_region(std::span<const double> all_pvalues, const ThresholdFamily& family,
                                       double q, std::size_t k_max) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("q must lie in (0,1)");
  if (k_max < 1 || k_max > family.size()) throw InvalidParameter("k_max must lie in [1, family length]");
  check_pvalues(all_pvalues);
  const std::size_t m = all_pvalues.size();
  const std::vector<std::size_t> order = order_by_pvalue(all_pvalues);

  // For the prefix of the s smallest p-values, #{i <= s : p_(i) >= t_k} = max(0, s - c_k)
  // with c_k = #{p < t_k}. c_k is non-decreasing in k, so
  //   V(s) = min( min_{k <= K(s), c_k < s} (k - 1 - c_k) + s,  (first k <= K(s) with c_k >= s) - 1 ).
  const std::size_t kmax = std::min(k_max, m);
  std::vector<std::size_t> c(kmax);
  {
    std::size_t below = 0;
    for (std::size_t k = 1; k <= kmax; ++k) {
      while (below < m && all_pvalues[order[below]] < family[k - 1]) ++below;
      c[k - 1] = below;
    }
  }

  constexpr auto kNone = std::numeric_limits<std::ptrdiff_t>::max();
  std::ptrdiff_t prefix_min = kNone;  // min of (k - 1 - c_k) over k with c_k < s, k <= K(s)
  std::size_t next_k = 1;             // first k not yet absorbed into prefix_min
  std::size_t best_size = 0;
  std::size_t best_v = 0;
  for (std::size_t s = 1; s <= m; ++s) {
    const std::size_t K = std::min(s, kmax);
    while (next_k <= K && c[next_k - 1] < s) {
      const auto term = static_cast<std::ptrdiff_t>(next_k) - 1 - static_cast<std::ptrdiff_t>(c[next_k - 1]);
      prefix_min = std::min(prefix_min, term);
      ++next_k;
    }
    std::size_t v = s;
    if (prefix_min != kNone) v = std::min(v, static_cast<std::size_t>(prefix_min + static_cast<std::ptrdiff_t>(s)));
    if (next_k <= K) v = std::min(v, next_k - 1);  // c_{next_k} >= s: term is next_k - 1
    if (static_cast<double>(v) / static_cast<double>(s) <= q) {
      best_size = s;
      best_v = v;
    }
  }

  RegionResult out;
  out.size = best_size;
  out.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best_size));
  out.cutoff = best_size > 0 ? all_pvalues[order[best_size - 1]] : 0.0;
  out.report = make_report(best_size, best_v, family.provenance(), 0.0);
  return out;
}

std::size_t hommel_value(std::span<const double> sorted, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0,1)");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw InvalidInput("p-values must be sorted ascending");
  const std::size_t m = sorted.size();
  const auto qualifies = [&](std::size_t i) {
    for (std::size_t k = 1; k <= i; ++k) {
      if (!(sorted[m - i + k - 1] > static_cast<double>(k) * alpha / static_cast<double>(i))) return false;
    }
    return true;
  };
  std::size_t lo = 0;
  std::size_t hi = m;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (qualifies(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

ThresholdFamily ari_thresholds(double alpha, std::size_t h, std::size_t length) {
  if (h == 0) throw InvalidParameter("ARI thresholds need a positive Hommel value");
  std::vector<double> t(length);
  for (std::size_t k = 1; k <= length; ++k) {
    t[k - 1] = std::min(1.0, alpha * static_cast<double>(k) / static_cast<double>(h));
  }
  return ThresholdFamily(std::move(t), "ari");
}

CalibratedFamily ari_family(std::span<const double> all_pvalues, double alpha) {
  check_pvalues(all_pvalues);
  std::vector<double> sorted(all_pvalues.begin(), all_pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const std::size_t h = hommel_value(sorted, alpha);

  CalibratedFamily f;
  f.method = Method::Ari;
  f.m = m;
  f.k_max = m;
  f.alpha = alpha;
  f.hommel = h;
  if (h == 0) {
    // every hypothesis rejected; all-ones thresholds make every V_k equal k - 1 >= 0 and the
    // bound is forced to 0 by tdp_on_subset.
    f.thresholds = ThresholdFamily(std::vector<double>(m, 1.0), "ari");
    f.degenerate = true;
  } else {
    f.thresholds = ari_thresholds(alpha, h, m);
  }
  return f;
}

BoundReport ari_bound(const VoxelSubset& subset, double alpha, std::size_t m, std::size_t h) {
  if (h > m) throw InvalidParameter("Hommel value exceeds m");
  if (h == 0) {
    BoundReport r = make_report(subset.p_values.size(), 0, "ari", alpha);
    r.degenerate = true;
    return r;
  }
  const ThresholdFamily t = ari_thresholds(alpha, h, m);
  const std::size_t v = false_positive_bound(subset.p_values, t, m);
  return make_report(subset.p_values.size(), v, "ari", alpha);
}

BoundReport tdp_on_subset(std::span<const double> subset_pvalues, const CalibratedFamily& family) {
  const std::string name(method_name(family.method));
  if (family.method == Method::Ari && family.degenerate) {
    BoundReport r = make_report(subset_pvalues.size(), 0, name, family.alpha);
    r.degenerate = true;
    return r;
  }
  const std::size_t v = false_positive_bound(subset_pvalues, family.thresholds, family.k_max);
  BoundReport r = make_report(subset_pvalues.size(), v, name, family.alpha);
  r.degenerate = family.degenerate;
  return r;
}

BoundReport tdp_on_subset(const VoxelSubset& subset, const CalibratedFamily& family) {
  return tdp_on_subset(subset.p_values, family);
}

RegionResult largest_controlled_region(std::span<const double> all_pvalues, const CalibratedFamily& family,
                                       double q) {
  const std::string name(method_name(family.method));
  RegionResult r;
  if (family.method == Method::Ari && family.degenerate) {
    check_pvalues(all_pvalues);
    const auto order = order_by_pvalue(all_pvalues);
    r.size = all_pvalues.size();
    r.indices = order;
    r.cutoff = r.size ? all_pvalues[order.back()] : 0.0;
    r.report = make_report(r.size, 0, name, family.alpha);
    r.report.degenerate = true;
    return r;
  }
  r = largest_controlled_region(all_pvalues, family.thresholds, q, family.k_max);
  r.report.method = name;
  r.report.alpha = family.alpha;
  r.report.degenerate = family.degenerate;
  return r;
}

RegionResult bh_region(std::span<const double> all_pvalues, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("q must lie in (0,1)");
  check_pvalues(all_pvalues);
  const std::size_t m = all_pvalues.size();
  const auto order = order_by_pvalue(all_pvalues);
  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    if (all_pvalues[order[k - 1]] <= q * static_cast<double>(k) / static_cast<double>(m)) k_star = k;
  }
  RegionResult r;
  r.size = k_star;
  r.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_star));
  r.cutoff = k_star ? all_pvalues[order[k_star - 1]] : 0.0;
  r.report = make_report(k_star, 0, "bh", q);
  return r;
}

}  // namespace notip
