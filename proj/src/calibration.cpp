#include "notipkit/calibration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/rng.hpp"

namespace notip {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Ari: return "ari";
    case Method::CalibratedSimes: return "calibrated-simes";
    case Method::Notip: return "notip";
    case Method::NotipSingle: return "notip-single";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "ari") return Method::Ari;
  if (name == "simes" || name == "calibrated-simes") return Method::CalibratedSimes;
  if (name == "notip") return Method::Notip;
  if (name == "notip-single") return Method::NotipSingle;
  throw InvalidParameter("unknown method '" + std::string(name) + "'");
}

std::size_t default_kmax(std::size_t m) { return std::max<std::size_t>(1, m / 50); }

void InferenceConfig::validate(std::size_t m) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0,1)");
  if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("q must lie in (0,1)");
  const std::size_t k = resolved_kmax(m);
  if (k < 1 || k > m) throw InvalidParameter("k_max must lie in [1, m]");
  if (B_train < 1 || B_infer < 1) throw InvalidParameter("randomization counts must be >= 1");
}

nlohmann::json to_json(const CalibratedFamily& f) {
  nlohmann::json j;
  j["method"] = method_name(f.method);
  j["m"] = f.m;
  j["k_max"] = f.k_max;
  j["alpha"] = f.alpha;
  j["lambda"] = f.lambda ? nlohmann::json(*f.lambda) : nlohmann::json(nullptr);
  j["b_calibrated"] = f.b_calibrated ? nlohmann::json(*f.b_calibrated) : nlohmann::json(nullptr);
  j["hommel"] = f.hommel ? nlohmann::json(*f.hommel) : nlohmann::json(nullptr);
  j["achieved_jer"] = f.achieved_jer ? nlohmann::json(*f.achieved_jer) : nlohmann::json(nullptr);
  j["fallback"] = f.fallback;
  j["degenerate"] = f.degenerate;
  j["thresholds_length"] = f.thresholds.size();
  return j;
}

CalibratedFamily calibrated_family_from_json(const nlohmann::json& j, ThresholdFamily thresholds) {
  CalibratedFamily f;
  try {
    f.method = parse_method(j.at("method").get<std::string>());
    f.m = j.at("m").get<std::size_t>();
    f.k_max = j.at("k_max").get<std::size_t>();
    f.alpha = j.at("alpha").get<double>();
    if (!j.at("lambda").is_null()) f.lambda = j.at("lambda").get<double>();
    if (!j.at("b_calibrated").is_null()) f.b_calibrated = j.at("b_calibrated").get<std::size_t>();
    if (!j.at("hommel").is_null()) f.hommel = j.at("hommel").get<std::size_t>();
    if (!j.at("achieved_jer").is_null()) f.achieved_jer = j.at("achieved_jer").get<double>();
    f.fallback = j.at("fallback").get<bool>();
    f.degenerate = j.at("degenerate").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("calibrated family JSON: ") + e.what(), 0);
  }
  if (thresholds.size() < f.k_max) {
    throw InvalidInput("thresholds vector shorter than the family's k_max");
  }
  f.thresholds = std::move(thresholds);
  return f;
}

std::size_t count_jer_violations(const NullPValueMatrix& null_pvals, std::span<const double> thresholds,
                                 std::size_t k_max) {
  if (k_max > null_pvals.tests() || k_max > thresholds.size()) {
    throw InvalidInput("k_max exceeds the null matrix width or the family length");
  }
  const std::size_t B = null_pvals.rows();
  std::vector<char> violated(B, 0);
  parallel_for(B, [&](std::size_t b) {
    const auto row = null_pvals.row(b);
    for (std::size_t k = 0; k < k_max; ++k) {
      if (row[k] < thresholds[k]) {
        violated[b] = 1;
        break;
      }
    }
  });
  return static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
}

double estimate_jer(const NullPValueMatrix& null_pvals, const ThresholdFamily& thresholds,
                    std::size_t k_max) {
  const std::size_t count = count_jer_violations(null_pvals, thresholds.values(), k_max);
  return static_cast<double>(count) / static_cast<double>(null_pvals.rows());
}

namespace {

// Largest finite non-negative double v with fits(v), for a predicate that holds on [0, v*] only.
// Non-negative doubles are ordered like their bit patterns, so this bisects on those.
template <typename Fits>
double largest_fitting(const Fits& fits) {
  std::uint64_t lo = 0;  // bits of 0.0, which always fits
  std::uint64_t hi = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::max());
  if (fits(std::bit_cast<double>(hi))) return std::bit_cast<double>(hi);
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (fits(std::bit_cast<double>(mid))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::bit_cast<double>(lo);
}

}  // namespace

double simes_pivotal_statistic(std::span<const double> sorted_row, std::size_t m, std::size_t k_max) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double pivot = kInf;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double p = sorted_row[k - 1];
    if (p >= 1.0) continue;  // thresholds never exceed 1, so p = 1 is never below one
    // largest lambda whose rounded threshold still does not exceed p
    const auto fits = [&](double v) { return simes_threshold(v, k, m) <= p; };
    double v = p * static_cast<double>(m) / static_cast<double>(k);
    for (int step = 0; step < 16 && !fits(v); ++step) v = std::nextafter(v, 0.0);
    int step = 0;
    for (; step < 16 && fits(v); ++step) v = std::nextafter(v, kInf);
    if (step > 0 && step < 16) {
      v = std::nextafter(v, 0.0);
    } else {
      v = largest_fitting(fits);
    }
    pivot = std::min(pivot, v);
  }
  return pivot;
}

std::size_t jer_violation_budget(std::size_t B, double alpha) {
  const auto within = [&](std::size_t k) {
    return static_cast<double>(k) / static_cast<double>(B) <= alpha;
  };
  auto K = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(B)));
  K = std::min(K, B);
  while (K > 0 && !within(K)) --K;
  while (K < B && within(K + 1)) ++K;
  return K;
}

CalibratedFamily calibrate_simes(const NullPValueMatrix& null_pvals, double alpha, std::size_t k_max) {
  const std::size_t B = null_pvals.rows();
  const std::size_t m = null_pvals.tests();
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in (0,1]");
  if (k_max < 1 || k_max > m) throw InvalidParameter("k_max must lie in [1, m]");

  CalibratedFamily out;
  out.method = Method::CalibratedSimes;
  out.m = m;
  out.k_max = k_max;
  out.alpha = alpha;

  const std::size_t K = jer_violation_budget(B, alpha);
  double lambda = 0.0;
  if (K == 0) {
    out.degenerate = true;
  } else {
    std::vector<double> pivots(B);
    parallel_for(B, [&](std::size_t b) {
      pivots[b] = simes_pivotal_statistic(null_pvals.row(b), m, k_max);
    });
    // rows with pivot < lambda are exactly the violated ones; index K keeps K of them at most
    const std::size_t idx = std::min(K, B - 1);
    std::nth_element(pivots.begin(), pivots.begin() + static_cast<std::ptrdiff_t>(idx), pivots.end());
    lambda = pivots[idx];
  }
  out.lambda = lambda;
  out.thresholds = simes_family(m, lambda, k_max);
  out.achieved_jer = estimate_jer(null_pvals, out.thresholds, k_max);
  return out;
}

CalibratedFamily calibrate_learned(const NullPValueMatrix& null_pvals, const LearnedTemplate& tpl,
                                   double alpha, std::size_t k_max) {
  if (tpl.tests() != null_pvals.tests()) {
    throw InvalidInput("template was learned on m=" + std::to_string(tpl.tests()) +
                       " tests but inference data has m=" + std::to_string(null_pvals.tests()));
  }
  if (k_max < 1 || k_max > tpl.k_max()) throw InvalidParameter("k_max must lie in [1, template k_max]");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("alpha must lie in (0,1]");

  const std::size_t B = null_pvals.rows();
  const std::size_t K = jer_violation_budget(B, alpha);
  const auto controls = [&](std::size_t b) {
    return count_jer_violations(null_pvals, tpl.curve(b), k_max) <= K;
  };

  // JER is non-decreasing in b because curves are ordered pointwise in b.
  std::size_t lo = 0;
  std::size_t hi = tpl.curve_count();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (controls(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }

  if (lo == 0) {
    CalibratedFamily fb = calibrate_simes(null_pvals, alpha, k_max);
    fb.fallback = true;
    return fb;
  }

  CalibratedFamily out;
  out.method = Method::Notip;
  out.m = tpl.tests();
  out.k_max = k_max;
  out.alpha = alpha;
  out.b_calibrated = lo;
  out.thresholds = tpl.family(lo).truncated(k_max);
  out.achieved_jer = estimate_jer(null_pvals, out.thresholds, k_max);
  return out;
}

SingleDatasetSeeds single_dataset_seeds(std::uint64_t seed) {
  return {derive_seed(seed, {stream::kSingleTrainRound}), derive_seed(seed, {stream::kSingleInferRound})};
}

CalibratedFamily notip_single_dataset(const DataMatrix& data, const InferenceConfig& cfg,
                                      std::size_t B_train, std::size_t k_max,
                                      const RandomizationOptions& design) {
  return notip_single_dataset(data, cfg, B_train, k_max, single_dataset_seeds(cfg.seed), design);
}

CalibratedFamily notip_single_dataset(const DataMatrix& data, const InferenceConfig& cfg,
                                      std::size_t B_train, std::size_t k_max, SingleDatasetSeeds seeds,
                                      const RandomizationOptions& design) {
  if (k_max < 1 || k_max > data.tests()) throw InvalidParameter("k_max must lie in [1, m]");

  RandomizationOptions train = design;
  train.B = B_train;
  train.seed = seeds.train_round;
  train.include_identity = cfg.include_identity;
  train.tail = cfg.tail;
  const LearnedTemplate tpl = learn_template(randomized_pvalue_matrix(data, train), k_max);

  RandomizationOptions infer = train;
  infer.B = cfg.B_infer;
  infer.seed = seeds.infer_round;
  CalibratedFamily out = calibrate_learned(randomized_pvalue_matrix(data, infer), tpl, cfg.alpha, k_max);
  if (!out.fallback) out.method = Method::NotipSingle;
  return out;
}

}  // namespace notip
