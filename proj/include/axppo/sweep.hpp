#pragma once

// Grid sweep over entropy coefficients and window lengths, with CSV and
// markdown reporting laid out as algorithm rows by coefficient columns.
//
// Output tree under SweepSpec::output_dir:
//   runs.csv                                   one row per run
//   table.md                                   seed-mean table
//   logs/run_<mode>_<c2>_<tau>_<seed>.csv      per-update log of each run

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "axppo/adaptive_entropy.hpp"
#include "axppo/trainer.hpp"

namespace axppo {

struct SweepSpec {
  std::vector<double> coefficient_grid{0.0, 0.1, 0.3, 0.5, 0.8};
  std::vector<int> tau_grid{1, 10, 20, 50, 100, 200};
  int seeds_per_cell = 3;
  std::uint64_t base_seed = 0;
  bool include_standard = true;
  int parallelism = 1;
  std::filesystem::path output_dir = "results";
  TrainConfig base;  // every non-grid hyperparameter

  void validate() const {
    detail::require(!coefficient_grid.empty(), "SweepSpec: coefficient grid is empty");
    detail::require(!tau_grid.empty(), "SweepSpec: tau grid is empty");
    detail::require(seeds_per_cell >= 1, "SweepSpec: seeds per cell must be >= 1");
    detail::require(parallelism >= 1, "SweepSpec: parallelism must be >= 1");
    for (double c : coefficient_grid) detail::require(c >= 0.0, "SweepSpec: coefficients must be >= 0");
    for (int t : tau_grid) detail::require(t >= 1, "SweepSpec: tau values must be >= 1");
  }
};

struct RunSpec {
  Mode mode = Mode::kStandard;
  double c2_base = 0.0;
  std::optional<int> tau;  // absent for standard PPO
  std::uint64_t seed = 0;
};

struct RunResult {
  Mode mode = Mode::kStandard;
  double c2_base = 0.0;
  std::optional<int> tau;
  std::uint64_t seed = 0;
  double final_mean_return = std::nan("");
  double wall_time_s = 0.0;
  std::filesystem::path log_path;
  std::optional<std::string> error;  // divergence or failure; excluded from cell means

  bool ok() const { return !error.has_value(); }
};

inline std::string format_coefficient(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", c);
  return buf;
}

inline std::string run_stem(const RunSpec& run) {
  return std::string("run_") + to_string(run.mode) + "_" + format_coefficient(run.c2_base) + "_" +
         (run.tau ? std::to_string(*run.tau) : std::string("na")) + "_" + std::to_string(run.seed);
}

// Grid order: standard x coefficients, then for each tau the adaptive
// nonzero coefficients; seeds innermost. Adaptive cells at coefficient 0 are
// skipped since they coincide with standard PPO.
inline std::vector<RunSpec> plan_runs(const SweepSpec& spec) {
  spec.validate();
  std::vector<RunSpec> runs;
  auto add_seeds = [&](Mode mode, double c2, std::optional<int> tau) {
    for (int k = 0; k < spec.seeds_per_cell; ++k)
      runs.push_back({mode, c2, tau, spec.base_seed + static_cast<std::uint64_t>(k)});
  };
  if (spec.include_standard)
    for (double c2 : spec.coefficient_grid) add_seeds(Mode::kStandard, c2, std::nullopt);
  for (int tau : spec.tau_grid)
    for (double c2 : spec.coefficient_grid)
      if (c2 != 0.0) add_seeds(Mode::kAdaptive, c2, tau);
  return runs;
}

inline TrainConfig config_for(const RunSpec& run, const TrainConfig& base) {
  TrainConfig config = base;
  config.mode = run.mode;
  config.c2_base = run.c2_base;
  config.tau = run.tau.value_or(1);
  config.seed = run.seed;
  return config;
}

// Trains, evaluates and writes the per-update log of one run.
inline RunResult execute_run(const RunSpec& run, const TrainConfig& base, const std::filesystem::path& log_dir) {
  const auto start = std::chrono::steady_clock::now();
  RunResult result{run.mode, run.c2_base, run.tau, run.seed};
  result.log_path = log_dir / (run_stem(run) + ".csv");
  try {
    const TrainConfig config = config_for(run, base);
    const TrainResult trained = train(config);
    std::ofstream log(result.log_path);
    if (!log) throw std::runtime_error("cannot write " + result.log_path.string());
    write_update_log(log, trained.records);
    if (trained.ok())
      result.final_mean_return = evaluate(trained.params, config).mean_return;
    else
      result.error = *trained.error;
  } catch (const std::exception& e) {
    result.error = e.what();
  }
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

using RunObserver = std::function<void(const RunResult&, std::size_t done, std::size_t total)>;

// Runs are isolated; results come back in plan order whatever the parallelism.
inline std::vector<RunResult> run_sweep(const SweepSpec& spec, const RunObserver& observer = {}) {
  const std::vector<RunSpec> plan = plan_runs(spec);
  const std::filesystem::path log_dir = spec.output_dir / "logs";
  std::filesystem::create_directories(log_dir);

  std::vector<RunResult> results(plan.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::mutex observer_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < plan.size(); i = next++) {
      results[i] = execute_run(plan[i], spec.base, log_dir);
      const std::size_t done = ++finished;
      if (observer) {
        std::lock_guard lock(observer_mutex);
        observer(results[i], done, plan.size());
      }
    }
  };

  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(spec.parallelism, plan.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return results;
}

enum class ReportFormat { kCsv, kMarkdown };

inline constexpr const char* kRunsCsvHeader = "mode,c2,tau,seed,final_return,wall_time_s,status";

namespace detail {

inline std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

inline std::string render_csv(std::span<const RunResult> results) {
  std::ostringstream out;
  out << kRunsCsvHeader << '\n';
  for (const RunResult& r : results) {
    out << to_string(r.mode) << ',' << format_coefficient(r.c2_base) << ','
        << (r.tau ? std::to_string(*r.tau) : std::string()) << ',' << r.seed << ','
        << (r.ok() ? format_double(r.final_mean_return) : std::string("nan")) << ','
        << format_double(r.wall_time_s) << ',' << (r.ok() ? "ok" : "diverged") << '\n';
  }
  return out.str();
}

inline std::string render_markdown(std::span<const RunResult> results) {
  std::vector<double> coefficients;
  std::vector<int> taus;
  for (const RunResult& r : results) {
    coefficients.push_back(r.c2_base);
    if (r.mode == Mode::kAdaptive && r.tau) taus.push_back(*r.tau);
  }
  std::sort(coefficients.begin(), coefficients.end());
  coefficients.erase(std::unique(coefficients.begin(), coefficients.end()), coefficients.end());
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  // (mode, tau or -1, c2) -> successful returns
  std::map<std::tuple<int, int, double>, std::vector<double>> cells;
  std::map<std::tuple<int, int, double>, int> attempted;
  for (const RunResult& r : results) {
    const auto key = std::tuple{static_cast<int>(r.mode), r.tau.value_or(-1), r.c2_base};
    ++attempted[key];
    if (r.ok()) cells[key].push_back(r.final_mean_return);
  }

  auto cell = [&](Mode mode, int tau, double c2) -> std::string {
    if (mode == Mode::kAdaptive && c2 == 0.0) return "-";
    const auto key = std::tuple{static_cast<int>(mode), tau, c2};
    if (!attempted.contains(key)) return "-";
    const auto it = cells.find(key);
    if (it == cells.end()) return "diverged";
    double sum = 0.0;
    for (double v : it->second) sum += v;
    return std::to_string(std::lround(sum / static_cast<double>(it->second.size())));
  };

  std::ostringstream out;
  out << "| Algorithm \\ Entropy coefficient |";
  for (double c : coefficients) out << ' ' << format_coefficient(c) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < coefficients.size(); ++i) out << "---|";
  out << "\n| Standard PPO |";
  for (double c : coefficients) out << ' ' << cell(Mode::kStandard, -1, c) << " |";
  out << '\n';
  for (int tau : taus) {
    out << "| axPPO τ = " << tau << " |";
    for (double c : coefficients) out << ' ' << cell(Mode::kAdaptive, tau, c) << " |";
    out << '\n';
  }
  return out.str();
}

}  // namespace detail

inline std::string render_results(std::span<const RunResult> results, ReportFormat format) {
  detail::require(!results.empty(), "render_results: no results");
  return format == ReportFormat::kCsv ? detail::render_csv(results) : detail::render_markdown(results);
}

inline void write_sweep_outputs(const SweepSpec& spec, std::span<const RunResult> results) {
  std::filesystem::create_directories(spec.output_dir);
  std::ofstream(spec.output_dir / "runs.csv") << render_results(results, ReportFormat::kCsv);
  std::ofstream(spec.output_dir / "table.md") << render_results(results, ReportFormat::kMarkdown);
}

}  // namespace axppo
