#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <CLI11.hpp>
#include <json.hpp>

#include "manifest.hpp"
#include "notipkit/calibration.hpp"
#include "notipkit/clusters.hpp"
#include "notipkit/errors.hpp"
#include "notipkit/experiment.hpp"
#include "notipkit/matrix.hpp"
#include "notipkit/parallel.hpp"
#include "notipkit/posthoc.hpp"
#include "notipkit/randomization.hpp"
#include "notipkit/rng.hpp"
#include "notipkit/simulator.hpp"
#include "notipkit/templates.hpp"
#include "notipkit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace notip;

struct Common {
  double alpha = 0.05;
  double q = 0.1;
  std::size_t kmax = 0;
  std::size_t b_train = kDefaultTrainRandomizations;
  std::size_t b_infer = kDefaultInferRandomizations;
  std::optional<std::uint64_t> seed;
  std::string output_dir = ".";
  std::size_t threads = 0;
  std::string tail = "upper";
  bool no_identity = false;
};

struct Options {
  Common common;
  std::string config;
  std::string data;
  std::string tpl;
  std::string method = "notip";
  bool single = false;
  std::optional<std::size_t> n_runs;
  std::size_t curves = 0;
  std::string dims;
  std::vector<double> z_thresholds;
  bool sweep = false;
  std::string connectivity = "face";
  std::string stat_map;
  std::vector<std::string> methods;
  std::vector<double> voxel_size;
  std::vector<double> origin;
  std::string order = "peak";
  std::string manifest;
};

std::uint64_t resolve_seed(const Common& c, std::uint64_t fallback = 0) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("NOTIPKIT_SEED"); env && *env) {
    try {
      std::size_t pos = 0;
      const std::uint64_t v = std::stoull(env, &pos);
      if (env[pos] != '\0') throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw InvalidParameter(std::string("NOTIPKIT_SEED is not an unsigned integer: ") + env);
    }
  }
  return fallback;
}

Tail resolve_tail(const std::string& s) {
  if (s == "upper") return Tail::Upper;
  if (s == "two-sided") return Tail::TwoSided;
  throw InvalidParameter("unknown tail '" + s + "'");
}

DataMatrix load_data(const std::string& path) {
  try {
    return DataMatrix::from_raw(load_any_matrix(path));
  } catch (const InvalidDesign& e) {
    throw InvalidDesign(path + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  return (fs::path(c.output_dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path);
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_truth_csv(const std::string& path, const GroundTruth& truth) {
  auto out = open_out(path);
  out << "index\n";
  for (std::size_t i = 0; i < truth.mask.size(); ++i) {
    if (truth.mask[i]) out << i << '\n';
  }
}

class Session {
 public:
  Session(std::string command, std::vector<std::string> argv) : started_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    manifest_.argv = std::move(argv);
    manifest_.version = kVersion;
    manifest_.started_at = cli::utc_timestamp(std::chrono::system_clock::now());
  }

  cli::RunManifest& manifest() { return manifest_; }
  void input(const std::string& p) { manifest_.inputs.push_back(p); }
  void output(const std::string& p) { manifest_.outputs.push_back(p); }

  // Pins the seed in the recorded argv so a replay does not depend on the environment.
  void pin_seed(std::uint64_t seed) {
    auto& a = manifest_.argv;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == "--seed" && i + 1 < a.size()) {
        a[i + 1] = std::to_string(seed);
        return;
      }
      if (a[i].rfind("--seed=", 0) == 0) {
        a[i] = "--seed=" + std::to_string(seed);
        return;
      }
    }
    a.push_back("--seed");
    a.push_back(std::to_string(seed));
  }

  void finish(const Common& c) {
    const auto elapsed = std::chrono::steady_clock::now() - started_;
    manifest_.wall_clock_seconds = std::chrono::duration<double>(elapsed).count();
    cli::save_manifest(out_path(c, manifest_.command + "_manifest.json"), manifest_);
  }

 private:
  cli::RunManifest manifest_;
  std::chrono::steady_clock::time_point started_;
};

SimulationConfig load_config_with_overrides(const Options& o) {
  SimulationConfig cfg = load_simulation_config(o.config);
  cfg.seed = resolve_seed(o.common, cfg.seed);
  if (o.n_runs) cfg.n_runs = *o.n_runs;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const Options& o, Session& s) {
  const SimulationConfig cfg = load_config_with_overrides(o);
  s.input(o.config);
  s.pin_seed(cfg.seed);
  s.manifest().config = to_json(cfg);
  s.manifest().seeds = {{"seed", cfg.seed}};

  const bool with_train = cfg.mode == ExperimentMode::SeparateTraining;
  const SimulatedData sim = simulate_data(cfg, 0, with_train);
  const std::string data = out_path(o.common, "data.bin");
  save_matrix(data, sim.infer.subjects(), sim.infer.tests(), sim.infer.values());
  const std::string truth = out_path(o.common, "truth.csv");
  write_truth_csv(truth, sim.truth);
  s.output(data);
  s.output(truth);
  if (with_train) {
    const std::string train = out_path(o.common, "train.bin");
    save_matrix(train, sim.train->subjects(), sim.train->tests(), sim.train->values());
    const std::string train_truth = out_path(o.common, "train_truth.csv");
    write_truth_csv(train_truth, *sim.train_truth);
    s.output(train);
    s.output(train_truth);
  }
  std::cout << "simulated " << sim.infer.subjects() << " x " << sim.infer.tests() << " (" << sim.truth.signal_count
            << " signal voxels)\n";
  return 0;
}

RandomizationOptions base_randomization(const Common& c, std::size_t B, std::uint64_t seed) {
  RandomizationOptions r;
  r.B = B;
  r.seed = seed;
  r.include_identity = !c.no_identity;
  r.tail = resolve_tail(c.tail);
  return r;
}

int cmd_learn(const Options& o, Session& s) {
  const DataMatrix data = load_data(o.data);
  s.input(o.data);
  const std::uint64_t seed = resolve_seed(o.common);
  s.pin_seed(seed);
  const std::size_t k_max = o.common.kmax == 0 ? default_kmax(data.tests()) : o.common.kmax;
  if (k_max > data.tests()) throw InvalidParameter("--kmax exceeds the number of tests");
  if (o.common.b_train < 1) throw InvalidParameter("--b-train must be >= 1");

  const std::uint64_t rseed = derive_seed(seed, {stream::kTrainRandomization});
  const NullPValueMatrix nulls = randomized_pvalue_matrix(data, base_randomization(o.common, o.common.b_train, rseed));
  const LearnedTemplate tpl = learn_template(nulls, k_max);
  const std::string path = out_path(o.common, "template.bin");
  save_template(path, tpl);
  s.output(path);
  s.manifest().config = {{"b_train", o.common.b_train}, {"k_max", k_max}, {"tail", o.common.tail},
                         {"include_identity", !o.common.no_identity}, {"subjects", data.subjects()},
                         {"tests", data.tests()}};
  s.manifest().seeds = {{"seed", seed}, {"train_randomization", rseed}};
  std::cout << "learned template: " << tpl.curve_count() << " curves, k_max " << k_max << '\n';
  return 0;
}

struct Calibrated {
  CalibratedFamily family;
  std::vector<double> pvalues;
  json seeds;
};

Method resolve_method(const std::string& name, bool single) {
  Method m = parse_method(name);
  if (single && m == Method::Notip) m = Method::NotipSingle;
  return m;
}

Calibrated calibrate(const DataMatrix& data, Method method, const Options& o, std::uint64_t seed,
                     std::optional<LearnedTemplate>& tpl, Session& s) {
  const Common& c = o.common;
  InferenceConfig icfg;
  icfg.alpha = c.alpha;
  icfg.q = c.q;
  icfg.k_max = c.kmax;
  icfg.B_train = c.b_train;
  icfg.B_infer = c.b_infer;
  icfg.seed = seed;
  icfg.include_identity = !c.no_identity;
  icfg.tail = resolve_tail(c.tail);
  icfg.validate(data.tests());

  const std::uint64_t rseed = derive_seed(seed, {stream::kInferRandomization});
  const RandomizationOptions ropts = base_randomization(c, c.b_infer, rseed);
  Calibrated out;
  out.pvalues = observed_pvalues(data, ropts);
  out.seeds = {{"seed", seed}};
  std::size_t k_max = icfg.resolved_kmax(data.tests());
  switch (method) {
    case Method::Ari:
      out.family = ari_family(out.pvalues, c.alpha);
      break;
    case Method::CalibratedSimes:
      out.family = calibrate_simes(randomized_pvalue_matrix(data, ropts), c.alpha, k_max);
      out.seeds["infer_randomization"] = rseed;
      break;
    case Method::Notip: {
      if (o.tpl.empty()) throw InvalidParameter("method notip needs --template or --single");
      if (!tpl) {
        tpl = load_template(o.tpl);
        s.input(o.tpl);
      }
      if (tpl->tests() != data.tests()) {
        throw InvalidInput(o.tpl + ": template has " + std::to_string(tpl->tests()) + " tests, data has " +
                           std::to_string(data.tests()));
      }
      if (c.kmax == 0) k_max = tpl->k_max();
      if (k_max > tpl->k_max()) throw InvalidParameter("--kmax exceeds the template's k_max");
      out.family = calibrate_learned(randomized_pvalue_matrix(data, ropts), *tpl, c.alpha, k_max);
      out.seeds["infer_randomization"] = rseed;
      break;
    }
    case Method::NotipSingle: {
      const SingleDatasetSeeds seeds = single_dataset_seeds(seed);
      out.family = notip_single_dataset(data, icfg, c.b_train, k_max, seeds, ropts);
      out.seeds["single_train_round"] = seeds.train_round;
      out.seeds["single_infer_round"] = seeds.infer_round;
      break;
    }
  }
  if (out.family.fallback) {
    std::cerr << "warning: no learned curve met the JER budget; fell back to calibrated Simes\n";
  }
  if (out.family.degenerate) std::cerr << "warning: " << method_name(method) << " family is degenerate\n";
  return out;
}

int cmd_infer(const Options& o, Session& s) {
  const Method method = resolve_method(o.method, o.single);
  if (method == Method::Notip && o.tpl.empty()) throw InvalidParameter("method notip needs --template or --single");
  const DataMatrix data = load_data(o.data);
  s.input(o.data);
  const std::uint64_t seed = resolve_seed(o.common);
  s.pin_seed(seed);

  std::optional<LearnedTemplate> tpl;
  const Calibrated cal = calibrate(data, method, o, seed, tpl, s);
  const RegionResult region = largest_controlled_region(cal.pvalues, cal.family, o.common.q);

  json report;
  report["method"] = method_name(cal.family.method);
  report["requested_method"] = method_name(method);
  report["family"] = to_json(cal.family);
  report["region"] = to_json(region.report);
  report["region"]["cutoff"] = region.cutoff;
  report["q"] = o.common.q;
  report["alpha"] = o.common.alpha;
  report["b_infer"] = method == Method::Ari ? 0 : o.common.b_infer;
  report["subjects"] = data.subjects();
  report["tests"] = data.tests();
  report["seed"] = seed;

  const std::string report_path = out_path(o.common, "report.json");
  write_json_file(report_path, report);
  const std::string region_path = out_path(o.common, "region.csv");
  {
    auto out = open_out(region_path);
    out << std::setprecision(17) << "index,p_value\n";
    for (const std::size_t i : region.indices) out << i << ',' << cal.pvalues[i] << '\n';
  }
  const std::string family_path = out_path(o.common, "family.csv");
  {
    auto out = open_out(family_path);
    out << std::setprecision(17) << "k,threshold\n";
    for (std::size_t k = 0; k < cal.family.thresholds.size(); ++k) {
      out << k + 1 << ',' << cal.family.thresholds[k] << '\n';
    }
  }
  s.output(report_path);
  s.output(region_path);
  s.output(family_path);
  s.manifest().config = {{"method", method_name(method)}, {"alpha", o.common.alpha}, {"q", o.common.q},
                         {"k_max", cal.family.k_max}, {"b_train", o.common.b_train}, {"b_infer", o.common.b_infer},
                         {"tail", o.common.tail}, {"include_identity", !o.common.no_identity}};
  s.manifest().seeds = cal.seeds;

  std::cout << method_name(cal.family.method) << ": region " << region.size << " voxels, V = "
            << region.report.false_positives << ", TDP >= " << region.report.tdp_bound << '\n';
  return 0;
}

std::string z_label(double z) {
  std::ostringstream ss;
  ss << z;
  return ss.str();
}

std::vector<double> z_from_pvalues(const std::vector<double>& p) {
  const boost::math::normal_distribution<double> normal;
  std::vector<double> z(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = std::clamp(p[i], std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
    z[i] = boost::math::quantile(boost::math::complement(normal, pi));
  }
  return z;
}

int cmd_cluster_report(const Options& o, Session& s) {
  const DataMatrix data = load_data(o.data);
  s.input(o.data);
  const std::uint64_t seed = resolve_seed(o.common);
  s.pin_seed(seed);
  const GridDims dims = GridDims::parse(o.dims);
  if (dims.voxel_count() != data.tests()) {
    throw InvalidInput("--dims " + dims.to_string() + " has " + std::to_string(dims.voxel_count()) +
                       " voxels, data has " + std::to_string(data.tests()) + " tests");
  }
  const Connectivity conn = parse_connectivity(o.connectivity);

  std::vector<std::string> names = o.methods;
  if (names.empty()) {
    names = {"ari", "calibrated-simes"};
    if (!o.tpl.empty()) names.emplace_back("notip");
    else if (o.single) names.emplace_back("notip-single");
  }
  std::optional<LearnedTemplate> tpl;
  std::vector<CalibratedFamily> families;
  std::vector<double> pvalues;
  json seeds = json::object();
  for (const auto& name : names) {
    const Method m = resolve_method(name, o.single);
    Calibrated cal = calibrate(data, m, o, seed, tpl, s);
    pvalues = std::move(cal.pvalues);
    seeds.update(cal.seeds);
    families.push_back(std::move(cal.family));
  }

  StatMap map;
  map.dims = dims;
  if (!o.stat_map.empty()) {
    const RawMatrix raw = load_any_matrix(o.stat_map);
    if (raw.values.size() != dims.voxel_count()) {
      throw InvalidInput(o.stat_map + ": stat map has " + std::to_string(raw.values.size()) + " values, expected " +
                         std::to_string(dims.voxel_count()));
    }
    map.values = raw.values;
    s.input(o.stat_map);
  } else {
    map.values = z_from_pvalues(pvalues);
  }
  map.mask.assign(dims.voxel_count(), 1);

  std::optional<Affine> affine;
  if (!o.voxel_size.empty() || !o.origin.empty()) {
    Affine a;
    if (!o.voxel_size.empty()) {
      if (o.voxel_size.size() != dims.rank()) throw InvalidParameter("--voxel-size needs one value per axis");
      std::copy(o.voxel_size.begin(), o.voxel_size.end(), a.voxel_size.begin());
    }
    if (!o.origin.empty()) {
      if (o.origin.size() != dims.rank()) throw InvalidParameter("--origin needs one value per axis");
      std::copy(o.origin.begin(), o.origin.end(), a.origin.begin());
    }
    affine = a;
  }

  std::vector<double> zs = o.z_thresholds;
  if (o.sweep) zs.insert(zs.end(), {2.5, 3.0, 3.5});
  if (zs.empty()) zs = {3.0};

  const ClusterOrder order = o.order == "size" ? ClusterOrder::Size : ClusterOrder::Peak;
  if (o.order != "size" && o.order != "peak") throw InvalidParameter("--order must be peak or size");
  for (const double z : zs) {
    ClusterTable table = cluster_tdp_table(extract_clusters(map, z, conn), pvalues, families, dims.rank(), z, affine);
    sort_table(table, order);
    const std::string csv = out_path(o.common, "clusters_z" + z_label(z) + ".csv");
    {
      auto out = open_out(csv);
      write_cluster_csv(out, table);
    }
    const std::string js = out_path(o.common, "clusters_z" + z_label(z) + ".json");
    write_json_file(js, to_json(table));
    s.output(csv);
    s.output(js);
    std::cout << "z > " << z << ": " << table.rows.size() << " clusters\n";
  }
  s.manifest().config = {{"methods", names}, {"alpha", o.common.alpha}, {"k_max", o.common.kmax},
                         {"b_train", o.common.b_train}, {"b_infer", o.common.b_infer}, {"dims", dims.extent},
                         {"connectivity", connectivity_name(conn)}, {"z_thresholds", zs}};
  s.manifest().seeds = seeds;
  return 0;
}

int cmd_experiment(const Options& o, Session& s) {
  const SimulationConfig cfg = load_config_with_overrides(o);
  s.input(o.config);
  s.pin_seed(cfg.seed);
  s.manifest().config = to_json(cfg);
  s.manifest().seeds = {{"seed", cfg.seed}};

  const ExperimentResult result = run_experiment(cfg);
  const std::string metrics = out_path(o.common, "metrics.csv");
  {
    auto out = open_out(metrics);
    write_metrics_csv(out, result);
  }
  const std::string summary = out_path(o.common, "summary.json");
  write_json_file(summary, summary_json(cfg, result));
  s.output(metrics);
  s.output(summary);

  for (const auto& m : result.summary) {
    std::cout << std::left << std::setw(18) << method_name(m.method) << " mean FDP " << m.mean_fdp << "  mean TPR "
              << m.mean_tpr << "  violations " << m.violation_fraction << '\n';
  }
  if (result.failed_run) {
    std::cerr << "error: run " << *result.failed_run << " failed: " << result.failure << '\n';
    return 4;
  }
  return 0;
}

int cmd_export_template(const Options& o, Session& s) {
  const LearnedTemplate tpl = load_template(o.tpl);
  s.input(o.tpl);
  const std::string path = out_path(o.common, "template.csv");
  {
    auto out = open_out(path);
    export_template_csv(out, tpl, o.curves);
  }
  s.output(path);
  s.manifest().config = {{"curves", o.curves}};
  return 0;
}

int run(std::vector<std::string> args);

int cmd_replay(const Options& o) {
  const cli::RunManifest m = cli::load_manifest(o.manifest);
  if (m.command == "replay") throw InvalidInput(o.manifest + ": cannot replay a replay");
  std::vector<std::string> argv{"notipkit"};
  for (std::size_t i = 0; i < m.argv.size(); ++i) {
    const std::string& a = m.argv[i];
    if (a == "--output-dir" || a == "-o") {
      ++i;
      continue;
    }
    if (a.rfind("--output-dir=", 0) == 0) continue;
    argv.push_back(a);
  }
  argv.push_back("--output-dir");
  argv.push_back(o.common.output_dir);
  return run(argv);
}

void add_common(CLI::App* app, Common& c, bool inference) {
  app->add_option("--seed", c.seed, "Base seed (falls back to NOTIPKIT_SEED, then 0)");
  app->add_option("-o,--output-dir", c.output_dir, "Directory for outputs")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  if (!inference) return;
  app->add_option("--alpha", c.alpha, "JER level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app->add_option("--q", c.q, "FDP level for the controlled region")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app->add_option("--kmax", c.kmax, "Family length (0 = max(1, m/50))")->capture_default_str();
  app->add_option("--b-train", c.b_train, "Randomizations for template learning")->capture_default_str();
  app->add_option("--b-infer", c.b_infer, "Randomizations for calibration")->capture_default_str();
  app->add_option("--tail", c.tail, "upper or two-sided")->capture_default_str();
  app->add_flag("--no-identity", c.no_identity, "Do not keep the observed data as the first randomization");
}

int run(std::vector<std::string> args) {
  CLI::App app{"Post hoc FDP/TDP bounds with learned templates (notipkit " + std::string(kVersion) + ")"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset and its ground truth from a config file");
  sim->add_option("config", o.config, "Simulation config")->required();
  add_common(sim, o.common, false);

  auto* learn = app.add_subcommand("learn", "Learn a template from training data");
  learn->add_option("--data", o.data, "Training data matrix (.bin or .csv)")->required();
  add_common(learn, o.common, true);

  auto* infer = app.add_subcommand("infer", "Calibrate a family and report the largest FDP-controlled region");
  infer->add_option("--data", o.data, "Data matrix (.bin or .csv)")->required();
  infer->add_option("--method", o.method, "ari, simes, notip or notip-single")->capture_default_str();
  infer->add_option("--template", o.tpl, "Template file for notip");
  infer->add_flag("--single", o.single, "Learn the template from the inference data");
  add_common(infer, o.common, true);

  auto* cluster = app.add_subcommand("cluster-report", "TDP bounds for suprathreshold clusters");
  cluster->add_option("--data", o.data, "Data matrix (.bin or .csv)")->required();
  cluster->add_option("--dims", o.dims, "Grid extent, e.g. 10x10x10")->required();
  cluster->add_option("--method", o.methods, "Methods to report (repeatable)");
  cluster->add_option("--template", o.tpl, "Template file for notip");
  cluster->add_flag("--single", o.single, "Learn the template from the inference data");
  cluster->add_option("--z-threshold", o.z_thresholds, "Cluster-forming threshold (repeatable)");
  cluster->add_flag("--sweep", o.sweep, "Add thresholds 2.5, 3 and 3.5");
  cluster->add_option("--connectivity", o.connectivity, "face, face-edge or face-edge-corner")->capture_default_str();
  cluster->add_option("--stat-map", o.stat_map, "Statistic map (default: z scores of the p-values)");
  cluster->add_option("--voxel-size", o.voxel_size, "Voxel size per axis")->delimiter(',');
  cluster->add_option("--origin", o.origin, "World coordinate of voxel 0")->delimiter(',');
  cluster->add_option("--order", o.order, "peak or size")->capture_default_str();
  add_common(cluster, o.common, true);

  auto* exp = app.add_subcommand("experiment", "Run the simulation study");
  exp->add_option("config", o.config, "Simulation config")->required();
  exp->add_option("--n-runs", o.n_runs, "Override the number of runs");
  add_common(exp, o.common, false);

  auto* exp_tpl = app.add_subcommand("export-template", "Write template curves as long-format CSV");
  exp_tpl->add_option("--template", o.tpl, "Template file")->required();
  exp_tpl->add_option("--curves", o.curves, "Evenly spaced curves to keep (0 = all)")->capture_default_str();
  add_common(exp_tpl, o.common, false);

  auto* replay = app.add_subcommand("replay", "Rerun the command recorded in a manifest");
  replay->add_option("manifest", o.manifest, "Manifest JSON")->required();
  replay->add_option("-o,--output-dir", o.common.output_dir, "Directory for outputs")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  set_thread_count(o.common.threads);
  if (replay->parsed()) return cmd_replay(o);

  CLI::App* sub = app.get_subcommands().front();
  Session session(sub->get_name(), std::vector<std::string>(args.begin() + 1, args.end()));
  int code = 0;
  if (sub == sim) code = cmd_simulate(o, session);
  else if (sub == learn) code = cmd_learn(o, session);
  else if (sub == infer) code = cmd_infer(o, session);
  else if (sub == cluster) code = cmd_cluster_report(o, session);
  else if (sub == exp) code = cmd_experiment(o, session);
  else if (sub == exp_tpl) code = cmd_export_template(o, session);
  session.finish(o.common);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv, argv + argc));
  } catch (const InvalidParameter& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 4;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
