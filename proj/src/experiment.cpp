#include "notipkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "notipkit/errors.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/posthoc.hpp"
#include "notipkit/randomization.hpp"
#include "notipkit/rng.hpp"
#include "notipkit/templates.hpp"

namespace notip {

std::string_view mode_name(ExperimentMode mode) {
  return mode == ExperimentMode::SeparateTraining ? "separate-training" : "single-dataset";
}

ExperimentMode parse_mode(std::string_view name) {
  if (name == "separate-training" || name == "separate") return ExperimentMode::SeparateTraining;
  if (name == "single-dataset" || name == "single") return ExperimentMode::SingleDataset;
  throw InvalidParameter("unknown experiment mode '" + std::string(name) + "'");
}

void SimulationConfig::validate() const {
  dims.validate();
  if (!(pi0 > 0.0 && pi0 <= 1.0)) throw InvalidParameter("pi0 must lie in (0,1]");
  if (!(fwhm >= 0.0)) throw InvalidParameter("fwhm must be >= 0");
  if (!std::isfinite(amplitude)) throw InvalidParameter("amplitude must be finite");
  if (n_infer < 2 || n_train < 2) throw InvalidParameter("subject counts must be >= 2");
  if (B_train < 1 || B_infer < 1) throw InvalidParameter("randomization counts must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0,1)");
  if (!(q > 0.0 && q < 1.0)) throw InvalidParameter("q must lie in (0,1)");
  if (resolved_kmax() > dims.voxel_count()) throw InvalidParameter("k_max exceeds the voxel count");
}

std::vector<Method> SimulationConfig::resolved_methods() const {
  if (!methods.empty()) return methods;
  if (mode == ExperimentMode::SingleDataset) {
    return {Method::Ari, Method::CalibratedSimes, Method::NotipSingle};
  }
  return {Method::Ari, Method::CalibratedSimes, Method::Notip};
}

std::size_t SimulationConfig::resolved_kmax() const {
  return k_max == 0 ? default_kmax(dims.voxel_count()) : k_max;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T v{};
  ss >> v;
  if (ss.fail() || !ss.eof()) throw InvalidParameter("config key '" + key + "': bad value '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw InvalidParameter("config key '" + key + "': expected a boolean, got '" + value + "'");
}

std::string join_methods(const std::vector<Method>& methods) {
  std::string s;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) s += ',';
    s += method_name(methods[i]);
  }
  return s;
}

}  // namespace

SimulationConfig parse_simulation_config(std::istream& in) {
  SimulationConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidParameter("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "dims") {
      cfg.dims = GridDims::parse(value);
    } else if (key == "pi0") {
      cfg.pi0 = parse_number<double>(key, value);
    } else if (key == "fwhm") {
      cfg.fwhm = parse_number<double>(key, value);
    } else if (key == "n_train") {
      cfg.n_train = parse_number<std::size_t>(key, value);
    } else if (key == "n_infer") {
      cfg.n_infer = parse_number<std::size_t>(key, value);
    } else if (key == "amplitude") {
      cfg.amplitude = parse_number<double>(key, value);
    } else if (key == "b_train") {
      cfg.B_train = parse_number<std::size_t>(key, value);
    } else if (key == "b_infer") {
      cfg.B_infer = parse_number<std::size_t>(key, value);
    } else if (key == "alpha") {
      cfg.alpha = parse_number<double>(key, value);
    } else if (key == "q") {
      cfg.q = parse_number<double>(key, value);
    } else if (key == "k_max" || key == "kmax") {
      cfg.k_max = parse_number<std::size_t>(key, value);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "n_runs") {
      cfg.n_runs = parse_number<std::size_t>(key, value);
    } else if (key == "include_identity") {
      cfg.include_identity = parse_bool(key, value);
    } else if (key == "mode") {
      cfg.mode = parse_mode(value);
    } else if (key == "methods") {
      cfg.methods.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) cfg.methods.push_back(parse_method(item));
      }
    } else {
      throw InvalidParameter("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open config " + path);
  return parse_simulation_config(in);
}

void write_simulation_config(std::ostream& out, const SimulationConfig& cfg) {
  out << std::setprecision(17);
  out << "dims = " << cfg.dims.to_string() << '\n'
      << "pi0 = " << cfg.pi0 << '\n'
      << "fwhm = " << cfg.fwhm << '\n'
      << "n_train = " << cfg.n_train << '\n'
      << "n_infer = " << cfg.n_infer << '\n'
      << "amplitude = " << cfg.amplitude << '\n'
      << "b_train = " << cfg.B_train << '\n'
      << "b_infer = " << cfg.B_infer << '\n'
      << "alpha = " << cfg.alpha << '\n'
      << "q = " << cfg.q << '\n'
      << "k_max = " << cfg.k_max << '\n'
      << "seed = " << cfg.seed << '\n'
      << "n_runs = " << cfg.n_runs << '\n'
      << "include_identity = " << (cfg.include_identity ? "true" : "false") << '\n'
      << "mode = " << mode_name(cfg.mode) << '\n'
      << "methods = " << join_methods(cfg.methods) << '\n';
}

nlohmann::json to_json(const SimulationConfig& cfg) {
  std::vector<std::string> methods;
  for (const auto m : cfg.resolved_methods()) methods.emplace_back(method_name(m));
  return {{"dims", cfg.dims.extent},
          {"pi0", cfg.pi0},
          {"fwhm", cfg.fwhm},
          {"n_train", cfg.n_train},
          {"n_infer", cfg.n_infer},
          {"amplitude", cfg.amplitude},
          {"b_train", cfg.B_train},
          {"b_infer", cfg.B_infer},
          {"alpha", cfg.alpha},
          {"q", cfg.q},
          {"k_max", cfg.resolved_kmax()},
          {"seed", cfg.seed},
          {"n_runs", cfg.n_runs},
          {"include_identity", cfg.include_identity},
          {"mode", mode_name(cfg.mode)},
          {"methods", methods}};
}

SimulatedData simulate_data(const SimulationConfig& cfg, std::size_t run, bool with_training) {
  SimulatedData out;
  out.truth = generate_ground_truth(cfg.dims, cfg.pi0, derive_seed(cfg.seed, {run, stream::kGroundTruth}));
  out.infer = simulate_dataset(out.truth, cfg.n_infer, cfg.fwhm, cfg.amplitude,
                               derive_seed(cfg.seed, {run, stream::kInferData}));
  if (with_training) {
    out.train_truth = generate_ground_truth(
        cfg.dims, cfg.pi0, derive_seed(cfg.seed, {run, stream::kTrainData, stream::kGroundTruth}));
    out.train = simulate_dataset(*out.train_truth, cfg.n_train, cfg.fwhm, cfg.amplitude,
                                 derive_seed(cfg.seed, {run, stream::kTrainData}));
  }
  return out;
}

RunRecord simulate_run(const SimulationConfig& cfg, std::size_t run) {
  const std::vector<Method> methods = cfg.resolved_methods();
  const std::size_t k_max = cfg.resolved_kmax();
  const auto wants = [&](Method m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

  const SimulatedData sim = simulate_data(cfg, run, wants(Method::Notip));
  const GroundTruth& truth = sim.truth;
  const DataMatrix& infer = sim.infer;
  RandomizationOptions infer_opts;
  infer_opts.B = cfg.B_infer;
  infer_opts.seed = derive_seed(cfg.seed, {run, stream::kInferRandomization});
  infer_opts.include_identity = cfg.include_identity;
  const std::vector<double> pvalues = observed_pvalues(infer, infer_opts);

  std::optional<NullPValueMatrix> infer_nulls;
  if (wants(Method::CalibratedSimes) || wants(Method::Notip)) {
    infer_nulls = randomized_pvalue_matrix(infer, infer_opts);
  }

  RunRecord record;
  record.run = run;
  record.signal_count = truth.signal_count;
  for (const Method method : methods) {
    CalibratedFamily family;
    switch (method) {
      case Method::Ari:
        family = ari_family(pvalues, cfg.alpha);
        break;
      case Method::CalibratedSimes:
        family = calibrate_simes(*infer_nulls, cfg.alpha, k_max);
        break;
      case Method::Notip: {
        RandomizationOptions train_opts = infer_opts;
        train_opts.B = cfg.B_train;
        train_opts.seed = derive_seed(cfg.seed, {run, stream::kTrainRandomization});
        const LearnedTemplate tpl = learn_template(randomized_pvalue_matrix(*sim.train, train_opts), k_max);
        family = calibrate_learned(*infer_nulls, tpl, cfg.alpha, k_max);
        break;
      }
      case Method::NotipSingle: {
        InferenceConfig icfg;
        icfg.alpha = cfg.alpha;
        icfg.q = cfg.q;
        icfg.B_infer = cfg.B_infer;
        icfg.include_identity = cfg.include_identity;
        icfg.seed = derive_seed(cfg.seed, {run});
        family = notip_single_dataset(infer, icfg, cfg.B_train, k_max);
        break;
      }
    }
    const RegionResult region = largest_controlled_region(pvalues, family, cfg.q);
    MethodRunResult r;
    r.method = method;
    r.metrics = evaluate_run(region.indices, truth, region.report.false_positives);
    r.metrics.method = std::string(method_name(method));
    r.violated = r.metrics.fdp > cfg.q;
    r.bound_holds = region.size - r.metrics.true_positives <= region.report.false_positives;
    r.fallback = family.fallback;
    if (family.b_calibrated) {
      r.parameter = static_cast<double>(*family.b_calibrated);
    } else if (family.lambda) {
      r.parameter = *family.lambda;
    } else if (family.hommel) {
      r.parameter = static_cast<double>(*family.hommel);
    }
    record.methods.push_back(std::move(r));
  }
  return record;
}

std::vector<MethodSummary> summarize(const std::vector<RunRecord>& runs, const std::vector<Method>& methods) {
  std::vector<MethodSummary> out;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    MethodSummary s;
    s.method = methods[mi];
    std::vector<double> tprs;
    for (const auto& run : runs) {
      const auto& r = run.methods.at(mi);
      s.mean_fdp += r.metrics.fdp;
      s.mean_region_size += static_cast<double>(r.metrics.region_size);
      s.violation_fraction += r.violated ? 1.0 : 0.0;
      s.bound_coverage += r.bound_holds ? 1.0 : 0.0;
      s.empty_region_fraction += r.metrics.region_size == 0 ? 1.0 : 0.0;
      s.fallback_count += r.fallback ? 1 : 0;
      tprs.push_back(r.metrics.tpr);
    }
    const double n = static_cast<double>(runs.size());
    if (!runs.empty()) {
      s.mean_fdp /= n;
      s.mean_region_size /= n;
      s.violation_fraction /= n;
      s.bound_coverage /= n;
      s.empty_region_fraction /= n;
      for (const double t : tprs) s.mean_tpr += t;
      s.mean_tpr /= n;
      if (runs.size() > 1) {
        double ss = 0.0;
        for (const double t : tprs) ss += (t - s.mean_tpr) * (t - s.mean_tpr);
        s.sd_tpr = std::sqrt(ss / (n - 1.0));
      }
    }
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_experiment(const SimulationConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<RunRecord>> slots(cfg.n_runs);
  std::vector<std::string> errors(cfg.n_runs);
  parallel_for(cfg.n_runs, [&](std::size_t run) {
    try {
      slots[run] = simulate_run(cfg, run);
    } catch (const std::exception& e) {
      errors[run] = e.what();
    }
  });

  ExperimentResult result;
  for (std::size_t run = 0; run < cfg.n_runs; ++run) {
    if (slots[run]) {
      result.runs.push_back(std::move(*slots[run]));
    } else if (!result.failed_run) {
      result.failed_run = run;
      result.failure = errors[run];
    }
  }
  result.summary = summarize(result.runs, cfg.resolved_methods());
  return result;
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  out << std::setprecision(17);
  out << "run,method,region_size,false_positive_bound,true_positives,fdp,tpr,violated,bound_holds,fallback,"
         "parameter\n";
  for (const auto& run : result.runs) {
    for (const auto& r : run.methods) {
      out << run.run << ',' << method_name(r.method) << ',' << r.metrics.region_size << ','
          << r.metrics.false_positive_bound << ',' << r.metrics.true_positives << ',' << r.metrics.fdp << ','
          << r.metrics.tpr << ',' << int(r.violated) << ',' << int(r.bound_holds) << ',' << int(r.fallback)
          << ',' << r.parameter << '\n';
    }
  }
}

nlohmann::json summary_json(const SimulationConfig& cfg, const ExperimentResult& result) {
  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["completed_runs"] = result.runs.size();
  if (result.failed_run) {
    j["failed_run"] = *result.failed_run;
    j["failure"] = result.failure;
  }
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& s : result.summary) {
    methods[std::string(method_name(s.method))] = {{"mean_fdp", s.mean_fdp},
                                                   {"mean_tpr", s.mean_tpr},
                                                   {"sd_tpr", s.sd_tpr},
                                                   {"mean_region_size", s.mean_region_size},
                                                   {"violation_fraction", s.violation_fraction},
                                                   {"bound_coverage", s.bound_coverage},
                                                   {"empty_region_fraction", s.empty_region_fraction},
                                                   {"fallback_count", s.fallback_count}};
  }
  j["methods"] = std::move(methods);
  return j;
}

}  // namespace notip
