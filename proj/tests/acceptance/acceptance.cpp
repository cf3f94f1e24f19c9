// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "calibration_checks.hpp"
#include "generators.hpp"
#include "notipkit/calibration.hpp"
#include "notipkit/experiment.hpp"
#include "notipkit/posthoc.hpp"
#include "notipkit/templates.hpp"
#include "oracles.hpp"

using namespace notip;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = limit_seconds <= 0.0 || secs < limit_seconds;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream line;
  line << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name << " -- " << o.detail;
  line.precision(3);
  line << std::fixed << " [" << secs << " s";
  if (limit_seconds > 0.0) line << " / limit " << limit_seconds << " s";
  line << "]";
  if (!in_time) line << " (too slow)";
  std::cout << line.str() << std::endl;
}

double margin(double alpha, double runs) { return 2.0 * std::sqrt(alpha * (1.0 - alpha) / runs); }

SimulationConfig scaled_config() {
  SimulationConfig cfg;
  cfg.dims = GridDims{{10, 10, 10}};
  cfg.pi0 = 0.9;
  cfg.fwhm = 4.0;
  cfg.n_train = 40;
  cfg.n_infer = 30;
  cfg.B_train = 200;
  cfg.B_infer = 200;
  cfg.q = 0.1;
  cfg.alpha = 0.05;
  cfg.n_runs = 200;
  cfg.seed = 20240601;
  cfg.methods = {Method::Ari, Method::CalibratedSimes, Method::Notip, Method::NotipSingle};
  return cfg;
}

const MethodSummary& summary_of(const ExperimentResult& r, Method m) {
  for (const auto& s : r.summary) {
    if (s.method == m) return s;
  }
  throw std::runtime_error("method missing from summary");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::cout << "acceptance suite" << std::endl;

  report(1, "bound equals brute-force recount", 10.0, [] {
    testgen::Rng rng(1001);
    std::size_t exact = 0;
    const std::size_t n = 1000;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t s = testgen::pick(rng, 0, 50);
      const std::size_t len = testgen::pick(rng, 1, 60);
      const auto p = testgen::pvalues(rng, s);
      const auto t = testgen::family(rng, len, testgen::uniform(rng, 0.01, 3.0));
      const std::size_t k_max = testgen::pick(rng, 1, len);
      exact += false_positive_bound(p, t, k_max) == oracle::bound(p, t.values(), k_max);
    }
    return Outcome{exact == n, std::to_string(exact) + "/" + std::to_string(n) + " exact"};
  });

  report(2, "largest region equals exhaustive level-set search", 30.0, [] {
    testgen::Rng rng(1002);
    std::size_t exact = 0;
    const std::size_t n = 200;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = testgen::pick(rng, 1, 200);
      const auto p = testgen::pvalues(rng, m, testgen::uniform(rng, 0.0, 0.6));
      const std::size_t k_max = testgen::pick(rng, 1, m);
      const auto t = testgen::family(rng, k_max, testgen::uniform(rng, 0.01, 2.0));
      const double q = testgen::uniform(rng, 0.01, 0.5);
      const auto r = largest_controlled_region(p, t, q, k_max);
      const auto o = oracle::region(p, t.values(), k_max, q);
      exact += r.size == o.size && r.report.false_positives == o.v;
    }
    return Outcome{exact == n, std::to_string(exact) + "/" + std::to_string(n) + " exact"};
  });

  report(3, "Hommel value equals definition check", 10.0, [] {
    testgen::Rng rng(1003);
    std::size_t exact = 0;
    const std::size_t n = 500;
    for (std::size_t i = 0; i < n; ++i) {
      auto p = testgen::pvalues(rng, testgen::pick(rng, 1, 12), 0.5);
      const double alpha = testgen::uniform(rng, 0.01, 0.5);
      const std::size_t expected = oracle::hommel(p, alpha);
      std::sort(p.begin(), p.end());
      exact += hommel_value(p, alpha) == expected;
    }
    return Outcome{exact == n, std::to_string(exact) + "/" + std::to_string(n) + " exact"};
  });

  report(4, "JER calibration qualifies and the next value fails", 60.0, [] {
    testgen::Rng rng(1004);
    const std::size_t n = 100;
    std::size_t simes_ok = 0, learned_ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = testgen::pick(rng, 5, 80);
      const std::size_t k_max = testgen::pick(rng, 1, m);
      const double alpha = testgen::uniform(rng, 0.05, 0.25);
      const auto nulls = testgen::null_matrix(rng, testgen::pick(rng, 50, 200), m);

      simes_ok += checks::simes_is_tight(nulls, calibrate_simes(nulls, alpha, k_max));

      const auto tpl = learn_template(testgen::null_matrix(rng, testgen::pick(rng, 50, 200), m), k_max);
      const auto f = calibrate_learned(nulls, tpl, alpha, k_max);
      const std::size_t K = checks::budget(nulls.rows(), alpha);
      if (f.fallback) {
        learned_ok += checks::learned_violations(nulls, tpl, 1, k_max) > K;
      } else {
        const std::size_t b = *f.b_calibrated;
        const bool qualifies = checks::learned_violations(nulls, tpl, b, k_max) <= K;
        const bool next_fails =
            b == tpl.curve_count() || checks::learned_violations(nulls, tpl, b + 1, k_max) > K;
        learned_ok += qualifies && next_fails;
      }
    }
    return Outcome{simes_ok == n && learned_ok == n,
                   "Simes " + std::to_string(simes_ok) + "/" + std::to_string(n) + ", learned " +
                       std::to_string(learned_ok) + "/" + std::to_string(n)};
  });

  // Criteria 5 and 6 share one experiment.
  std::optional<ExperimentResult> scaled;
  double scaled_seconds = 0.0;
  {
    const auto start = std::chrono::steady_clock::now();
    try {
      scaled = run_experiment(scaled_config());
    } catch (const std::exception& e) {
      std::cout << "scaled experiment failed: " << e.what() << std::endl;
    }
    scaled_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  report(5, "FDP control on the scaled experiment", 0.0, [&] {
    if (!scaled || scaled->failed_run) return Outcome{false, "experiment did not complete"};
    const double limit = 0.05 + margin(0.05, 200.0);
    std::ostringstream d;
    d.precision(4);
    bool ok = scaled->runs.size() == 200 && scaled_seconds < 900.0;
    for (const auto& s : scaled->summary) {
      ok = ok && s.violation_fraction <= limit;
      d << method_name(s.method) << " " << s.violation_fraction << ", ";
    }
    d << "limit " << limit << ", " << scaled->runs.size() << " runs in " << scaled_seconds << " s (limit 900 s)";
    return Outcome{ok, d.str()};
  });

  report(6, "mean TPR ordering and gains", 0.0, [&] {
    if (!scaled || scaled->failed_run) return Outcome{false, "experiment did not complete"};
    const double ari = summary_of(*scaled, Method::Ari).mean_tpr;
    const double simes = summary_of(*scaled, Method::CalibratedSimes).mean_tpr;
    const double notip = summary_of(*scaled, Method::Notip).mean_tpr;
    const double single = summary_of(*scaled, Method::NotipSingle).mean_tpr;
    const double gain_ari = ari > 0.0 ? notip / ari - 1.0 : 0.0;
    const double gain_simes = simes > 0.0 ? notip / simes - 1.0 : 0.0;
    const bool ok = notip >= simes && simes >= ari && gain_ari >= 0.30 && gain_simes >= 0.10;
    std::ostringstream d;
    d.precision(4);
    d << "TPR ari " << ari << ", simes " << simes << ", notip " << notip << " (notip-single " << single
      << "); gain vs ari " << 100.0 * gain_ari << "% (need 30%), vs simes " << 100.0 * gain_simes
      << "% (need 10%)";
    return Outcome{ok, d.str()};
  });

  report(7, "JER non-decreasing in k_max", 30.0, [] {
    testgen::Rng rng(1007);
    const std::size_t n = 50;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = testgen::pick(rng, 200, 400);
      const auto tpl = learn_template(testgen::null_matrix(rng, 100, m), 200);
      const auto nulls = testgen::null_matrix(rng, 200, m);
      const std::size_t b = testgen::pick(rng, 1, 100);
      const std::size_t j10 = count_jer_violations(nulls, tpl.curve(b), 10);
      const std::size_t j50 = count_jer_violations(nulls, tpl.curve(b), 50);
      const std::size_t j200 = count_jer_violations(nulls, tpl.curve(b), 200);
      ok += j10 <= j50 && j50 <= j200;
    }
    return Outcome{ok == n, std::to_string(ok) + "/" + std::to_string(n) + " instances monotone over K = 10, 50, 200"};
  });

  report(8, "null world selects nothing", 300.0, [] {
    auto cfg = scaled_config();
    cfg.pi0 = 1.0;
    cfg.n_runs = 100;
    cfg.seed = 777;
    const auto r = run_experiment(cfg);
    if (r.failed_run) return Outcome{false, "run " + std::to_string(*r.failed_run) + " failed: " + r.failure};
    const double need = 0.95 - margin(0.05, 100.0);
    bool ok = true;
    std::ostringstream d;
    d.precision(4);
    for (const auto& s : r.summary) {
      ok = ok && s.empty_region_fraction >= need;
      d << method_name(s.method) << " " << s.empty_region_fraction << ", ";
    }
    d << "need >= " << need;
    return Outcome{ok, d.str()};
  });

  report(9, "experiment command is byte-reproducible", 120.0, [] {
    const fs::path dir = fs::temp_directory_path() / "notipkit_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
      std::ofstream cfg(dir / "cfg.txt");
      cfg << "dims = 10x10x10\npi0 = 0.9\nfwhm = 4\nn_train = 40\nn_infer = 30\nb_train = 200\n"
             "b_infer = 200\nn_runs = 20\nseed = 99\nmethods = ari,simes,notip,notip-single\n";
    }
    int codes = 0;
    for (const char* out : {"a", "b"}) {
      const std::string cmd = std::string(NOTIPKIT_CLI) + " experiment " + (dir / "cfg.txt").string() + " -o " +
                              (dir / out).string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      codes += WIFEXITED(status) ? WEXITSTATUS(status) : 1;
    }
    const std::string a = slurp((dir / "a/metrics.csv").string());
    const std::string b = slurp((dir / "b/metrics.csv").string());
    fs::remove_all(dir);
    const bool ok = codes == 0 && !a.empty() && a == b;
    return Outcome{ok, ok ? "identical metrics.csv (" + std::to_string(a.size()) + " bytes)"
                          : "outputs differ or command failed"};
  });

  report(10, "default k_max for m = 50000", 0.0, [] {
    const std::size_t k = default_kmax(50000);
    return Outcome{k == 1000, "resolved " + std::to_string(k)};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
