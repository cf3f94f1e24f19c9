#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "notipkit/randomization.hpp"
#include "notipkit/templates.hpp"

namespace notip {

enum class Method { Ari, CalibratedSimes, Notip, NotipSingle };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

/// floor(0.02 * m), at least 1.
std::size_t default_kmax(std::size_t m);

inline constexpr std::size_t kDefaultTrainRandomizations = 10000;
inline constexpr std::size_t kDefaultInferRandomizations = 1000;

struct InferenceConfig {
  double alpha = 0.05;
  /// FDP budget for the largest controlled region.
  double q = 0.1;
  /// 0 resolves to default_kmax(m).
  std::size_t k_max = 0;
  std::size_t B_train = kDefaultTrainRandomizations;
  std::size_t B_infer = kDefaultInferRandomizations;
  std::uint64_t seed = 0;
  bool include_identity = true;
  Tail tail = Tail::Upper;

  std::size_t resolved_kmax(std::size_t m) const { return k_max == 0 ? default_kmax(m) : k_max; }
  /// Throws InvalidParameter on alpha, q or k_max out of range for m tests.
  void validate(std::size_t m) const;
};

/// A JER-calibrated threshold family and how it was obtained.
struct CalibratedFamily {
  ThresholdFamily thresholds;
  Method method = Method::CalibratedSimes;
  std::size_t m = 0;
  std::size_t k_max = 0;
  double alpha = 0.0;
  std::optional<double> lambda;
  /// 1-based index of the selected learned-template curve.
  std::optional<std::size_t> b_calibrated;
  std::optional<std::size_t> hommel;
  /// Empirical JER on the inference randomizations; absent for ARI (no randomization).
  std::optional<double> achieved_jer;
  /// Learned calibration found no qualifying curve and fell back to calibrated Simes.
  bool fallback = false;
  /// lambda forced to 0 because floor(alpha * B) = 0, or ARI with h = 0.
  bool degenerate = false;
};

nlohmann::json to_json(const CalibratedFamily& family);
/// Inverse of to_json; thresholds are supplied separately (binary vector file).
CalibratedFamily calibrated_family_from_json(const nlohmann::json& j, ThresholdFamily thresholds);

/// Number of rows b' for which some k <= k_max has row[k] < t_k (strict).
std::size_t count_jer_violations(const NullPValueMatrix& null_pvals, std::span<const double> thresholds,
                                 std::size_t k_max);

/// Fraction of violating rows; see count_jer_violations.
double estimate_jer(const NullPValueMatrix& null_pvals, const ThresholdFamily& thresholds,
                    std::size_t k_max);

/// Largest lambda such that row b is not violated by simes_family(lambda); +inf when no lambda
/// violates it. Row b is violated at lambda exactly when lambda exceeds this value.
double simes_pivotal_statistic(std::span<const double> sorted_row, std::size_t m, std::size_t k_max);

/// Largest violation count K with K / B <= alpha, using the same arithmetic as estimate_jer.
std::size_t jer_violation_budget(std::size_t B, double alpha);

/// Simes family with lambda = the (K+1)-th smallest pivotal statistic, K = jer_violation_budget.
/// When K = 0 returns lambda = 0 flagged degenerate.
CalibratedFamily calibrate_simes(const NullPValueMatrix& null_pvals, double alpha, std::size_t k_max);

/// Largest b with estimate_jer(curve b) <= alpha, by binary search over b. Falls back to
/// calibrate_simes (flagged) when no curve qualifies.
CalibratedFamily calibrate_learned(const NullPValueMatrix& null_pvals, const LearnedTemplate& tpl,
                                   double alpha, std::size_t k_max);

struct SingleDatasetSeeds {
  std::uint64_t train_round;
  std::uint64_t infer_round;
};

/// Seeds for the two randomization rounds, derived from one user seed on disjoint streams.
SingleDatasetSeeds single_dataset_seeds(std::uint64_t seed);

/// Template learning and calibration on the same data with two independent randomization
/// rounds (B_train rows, then cfg.B_infer rows).
CalibratedFamily notip_single_dataset(const DataMatrix& data, const InferenceConfig& cfg,
                                      std::size_t B_train, std::size_t k_max,
                                      const RandomizationOptions& design = {});
CalibratedFamily notip_single_dataset(const DataMatrix& data, const InferenceConfig& cfg,
                                      std::size_t B_train, std::size_t k_max,
                                      SingleDatasetSeeds seeds, const RandomizationOptions& design = {});

}  // namespace notip
