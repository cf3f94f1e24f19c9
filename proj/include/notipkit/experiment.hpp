#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "notipkit/calibration.hpp"
#include "notipkit/simulator.hpp"

namespace notip {

enum class ExperimentMode { SeparateTraining, SingleDataset };

std::string_view mode_name(ExperimentMode mode);
ExperimentMode parse_mode(std::string_view name);

/// Signal amplitude (in units of the unit-variance noise) used when a config omits it.
inline constexpr double kDefaultAmplitude = 0.5;

struct SimulationConfig {
  GridDims dims{{10, 10, 10}};
  double pi0 = 0.9;
  double fwhm = 4.0;
  std::size_t n_train = 100;
  std::size_t n_infer = 50;
  double amplitude = kDefaultAmplitude;
  std::size_t B_train = 1000;
  std::size_t B_infer = 1000;
  double alpha = 0.05;
  double q = 0.1;
  /// 0 resolves to default_kmax(m).
  std::size_t k_max = 0;
  std::uint64_t seed = 0;
  std::size_t n_runs = 100;
  bool include_identity = true;
  ExperimentMode mode = ExperimentMode::SeparateTraining;
  /// Empty selects the mode's defaults (ARI, calibrated Simes and Notip or Notip-single).
  std::vector<Method> methods;

  void validate() const;
  std::vector<Method> resolved_methods() const;
  std::size_t resolved_kmax() const;
};

/// Reads "key = value" lines; '#' starts a comment. Unknown keys are rejected.
SimulationConfig parse_simulation_config(std::istream& in);
SimulationConfig load_simulation_config(const std::string& path);
/// Writes every field in the format parse_simulation_config reads.
void write_simulation_config(std::ostream& out, const SimulationConfig& cfg);
nlohmann::json to_json(const SimulationConfig& cfg);

struct MethodRunResult {
  Method method = Method::Ari;
  MethodMetrics metrics;
  /// FDP of the region exceeds q.
  bool violated = false;
  /// True number of nulls in the region is within the false-positive bound.
  bool bound_holds = true;
  bool fallback = false;
  /// lambda, b_calibrated or Hommel value, depending on the method.
  double parameter = 0.0;
};

struct RunRecord {
  std::size_t run = 0;
  std::size_t signal_count = 0;
  std::vector<MethodRunResult> methods;
};

struct MethodSummary {
  Method method = Method::Ari;
  double mean_fdp = 0.0;
  double mean_tpr = 0.0;
  double sd_tpr = 0.0;
  double mean_region_size = 0.0;
  double violation_fraction = 0.0;
  double bound_coverage = 0.0;
  double empty_region_fraction = 0.0;
  std::size_t fallback_count = 0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;  // sorted by run index
  std::vector<MethodSummary> summary;
  /// Set when a run threw; runs holds every run that completed.
  std::optional<std::size_t> failed_run;
  std::string failure;
};

struct SimulatedData {
  GroundTruth truth;
  DataMatrix infer;
  /// Independent training world (own signal locations); empty unless requested.
  std::optional<GroundTruth> train_truth;
  std::optional<DataMatrix> train;
};

/// Datasets of one run, drawn from streams derived from (seed, run).
SimulatedData simulate_data(const SimulationConfig& cfg, std::size_t run, bool with_training);

/// One simulated run: fresh ground truth and datasets, every method's calibrated family and
/// largest q-controlled region, scored against the truth.
RunRecord simulate_run(const SimulationConfig& cfg, std::size_t run);

/// All runs in parallel; each run uses streams derived from (seed, run index).
ExperimentResult run_experiment(const SimulationConfig& cfg);

std::vector<MethodSummary> summarize(const std::vector<RunRecord>& runs, const std::vector<Method>& methods);

void write_metrics_csv(std::ostream& out, const ExperimentResult& result);
nlohmann::json summary_json(const SimulationConfig& cfg, const ExperimentResult& result);

}  // namespace notip
