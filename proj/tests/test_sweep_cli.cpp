#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "axppo/cli.hpp"
#include "axppo/sweep.hpp"

using namespace axppo;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("axppo_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

SweepSpec tiny_spec(const std::string& name) {
  SweepSpec spec;
  spec.coefficient_grid = {0.0, 0.3};
  spec.tau_grid = {1, 5};
  spec.seeds_per_cell = 2;
  spec.base.total_env_steps = 2 * spec.base.horizon;
  spec.base.eval_episodes = 2;
  spec.output_dir = fresh_dir(name);
  return spec;
}

RunResult fake(Mode mode, double c2, std::optional<int> tau, std::uint64_t seed, double ret) {
  RunResult r{mode, c2, tau, seed};
  r.final_mean_return = ret;
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(PlanRuns, DefaultGridCount) {
  const auto plan = plan_runs(SweepSpec{});
  EXPECT_EQ(plan.size(), 87u);  // 5 coefficients x 3 seeds + 6 taus x 4 nonzero x 3 seeds
  EXPECT_EQ(plan.front().mode, Mode::kStandard);
  EXPECT_FALSE(plan.front().tau.has_value());
  for (const RunSpec& r : plan)
    if (r.mode == Mode::kAdaptive) EXPECT_NE(r.c2_base, 0.0);
}

TEST(PlanRuns, SingleCellAndSeeds) {
  SweepSpec spec;
  spec.coefficient_grid = {0.1};
  spec.tau_grid = {1};
  spec.seeds_per_cell = 1;
  spec.include_standard = false;
  const auto plan = plan_runs(spec);
  ASSERT_EQ(plan.size(), 1u);
  EXPECT_EQ(plan[0].mode, Mode::kAdaptive);
  EXPECT_EQ(plan[0].tau, 1);

  spec.seeds_per_cell = 3;
  spec.base_seed = 10;
  const auto seeded = plan_runs(spec);
  ASSERT_EQ(seeded.size(), 3u);
  EXPECT_EQ(seeded[2].seed, 12u);

  spec.tau_grid.clear();
  EXPECT_THROW(plan_runs(spec), ContractViolation);
}

TEST(RunStem, NamesFollowModeCoefficientTauSeed) {
  EXPECT_EQ(run_stem({Mode::kAdaptive, 0.3, 50, 2}), "run_adaptive_0.3_50_2");
  EXPECT_EQ(run_stem({Mode::kStandard, 0.0, std::nullopt, 0}), "run_standard_0_na_0");
}

TEST(RunSweep, ParallelismDoesNotChangeResults) {
  SweepSpec serial = tiny_spec("serial");
  SweepSpec parallel = tiny_spec("parallel");
  parallel.parallelism = 4;
  const auto a = run_sweep(serial);
  const auto b = run_sweep(parallel);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.size(), plan_runs(serial).size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mode, b[i].mode);
    EXPECT_EQ(a[i].c2_base, b[i].c2_base);
    EXPECT_EQ(a[i].tau, b[i].tau);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_TRUE(a[i].ok());
    EXPECT_EQ(a[i].final_mean_return, b[i].final_mean_return);

    std::ifstream la(a[i].log_path), lb(b[i].log_path);
    ASSERT_TRUE(la && lb);
    EXPECT_EQ(read_update_log(la), read_update_log(lb));
  }
  std::filesystem::remove_all(serial.output_dir);
  std::filesystem::remove_all(parallel.output_dir);
}

TEST(RunSweep, WritesRunsTableAndLogs) {
  SweepSpec spec = tiny_spec("outputs");
  const auto results = run_sweep(spec);
  write_sweep_outputs(spec, results);

  std::ifstream csv(spec.output_dir / "runs.csv");
  std::stringstream csv_text;
  csv_text << csv.rdbuf();
  const auto rows = lines_of(csv_text.str());
  ASSERT_EQ(rows.size(), results.size() + 1);
  EXPECT_EQ(rows[0], kRunsCsvHeader);

  EXPECT_TRUE(std::filesystem::exists(spec.output_dir / "table.md"));
  for (const RunResult& r : results) {
    EXPECT_EQ(r.log_path.parent_path(), spec.output_dir / "logs");
    std::ifstream log(r.log_path);
    EXPECT_EQ(read_update_log(log).size(), 2u);
  }
  std::filesystem::remove_all(spec.output_dir);
}

TEST(RenderResults, MarkdownCellsAreSeedMeans) {
  std::vector<RunResult> results;
  for (double c2 : {0.0, 0.1, 0.3, 0.5, 0.8})
    for (std::uint64_t s = 0; s < 3; ++s) results.push_back(fake(Mode::kStandard, c2, std::nullopt, s, 420.0 + 10.0 * s));
  for (int tau : {1, 10, 20, 50, 100, 200})
    for (double c2 : {0.1, 0.3, 0.5, 0.8})
      for (std::uint64_t s = 0; s < 3; ++s) results.push_back(fake(Mode::kAdaptive, c2, tau, s, 100.0));

  const auto lines = lines_of(render_results(results, ReportFormat::kMarkdown));
  ASSERT_EQ(lines.size(), 9u);  // header, separator, standard row, six tau rows
  EXPECT_EQ(lines[0], "| Algorithm \\ Entropy coefficient | 0 | 0.1 | 0.3 | 0.5 | 0.8 |");
  EXPECT_EQ(lines[2], "| Standard PPO | 430 | 430 | 430 | 430 | 430 |");
  EXPECT_EQ(lines[3], "| axPPO τ = 1 | - | 100 | 100 | 100 | 100 |");
  EXPECT_EQ(lines[8], "| axPPO τ = 200 | - | 100 | 100 | 100 | 100 |");
  for (std::size_t i = 2; i < lines.size(); ++i)
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), '|'), 7) << lines[i];
}

TEST(RenderResults, FailedRunsAreExcludedFromMeans) {
  std::vector<RunResult> results{fake(Mode::kStandard, 0.1, std::nullopt, 0, 300.0),
                                 fake(Mode::kStandard, 0.1, std::nullopt, 1, 0.0),
                                 fake(Mode::kStandard, 0.3, std::nullopt, 0, 0.0)};
  results[1].error = "diverged";
  results[2].error = "diverged";
  const auto lines = lines_of(render_results(results, ReportFormat::kMarkdown));
  EXPECT_EQ(lines[2], "| Standard PPO | 300 | diverged |");

  const auto csv = lines_of(render_results(results, ReportFormat::kCsv));
  ASSERT_EQ(csv.size(), 4u);
  EXPECT_EQ(csv[1].substr(0, 18), "standard,0.1,,0,30");
  EXPECT_EQ(csv[2].substr(csv[2].size() - 9), ",diverged");

  EXPECT_THROW(render_results({}, ReportFormat::kCsv), ContractViolation);
}

TEST(Cli, TrainFlagsMapOntoConfig) {
  const ParseOutcome p = parse_cli({"train", "--algo", "adaptive", "--entropy-coef", "0.3", "--tau", "50", "--seed",
                                    "2", "--total-steps", "60000", "--out", "runs/x"});
  ASSERT_TRUE(p.command) << p.message;
  const auto& cmd = std::get<TrainCommand>(*p.command);
  EXPECT_EQ(cmd.config.mode, Mode::kAdaptive);
  EXPECT_EQ(cmd.config.c2_base, 0.3);
  EXPECT_EQ(cmd.config.tau, 50);
  EXPECT_EQ(cmd.config.seed, 2u);
  EXPECT_EQ(cmd.config.total_env_steps, 60000);
  EXPECT_EQ(cmd.out, "runs/x");
}

TEST(Cli, SweepDefaultsAndLists) {
  const ParseOutcome defaults = parse_cli({"sweep"});
  ASSERT_TRUE(defaults.command) << defaults.message;
  const SweepSpec& d = std::get<SweepCommand>(*defaults.command).spec;
  EXPECT_EQ(d.coefficient_grid, (std::vector<double>{0.0, 0.1, 0.3, 0.5, 0.8}));
  EXPECT_EQ(d.tau_grid, (std::vector<int>{1, 10, 20, 50, 100, 200}));
  EXPECT_EQ(d.seeds_per_cell, 3);
  EXPECT_TRUE(d.include_standard);

  const ParseOutcome p =
      parse_cli({"sweep", "--coefs", "0.1,0.5", "--taus", "10,20", "--seeds", "2", "--jobs", "3", "--out", "o"});
  ASSERT_TRUE(p.command) << p.message;
  const SweepSpec& s = std::get<SweepCommand>(*p.command).spec;
  EXPECT_EQ(s.coefficient_grid, (std::vector<double>{0.1, 0.5}));
  EXPECT_EQ(s.tau_grid, (std::vector<int>{10, 20}));
  EXPECT_EQ(s.seeds_per_cell, 2);
  EXPECT_EQ(s.parallelism, 3);
  EXPECT_EQ(s.output_dir, "o");
}

TEST(Cli, EvalRequiresCheckpoint) {
  const ParseOutcome p = parse_cli({"eval", "--checkpoint", "a.ckpt", "--episodes", "5", "--seed", "7"});
  ASSERT_TRUE(p.command) << p.message;
  const auto& e = std::get<EvalCommand>(*p.command);
  EXPECT_EQ(e.checkpoint, "a.ckpt");
  EXPECT_EQ(e.episodes, 5);
  EXPECT_EQ(e.seed, 7u);
  EXPECT_NE(parse_cli({"eval"}).exit_code, 0);
}

TEST(Cli, RejectsBadInput) {
  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"train", "--algo", "bogus"}, {"train", "--tau", "0"}, {"train", "--nope"},
        {"sweep", "--coefs", "-1"}, {"train", "--minibatch", "100"}, {}}) {
    const ParseOutcome p = parse_cli(args);
    EXPECT_FALSE(p.command.has_value());
    EXPECT_EQ(p.exit_code, 2);
    EXPECT_FALSE(p.message.empty());
  }
  const ParseOutcome help = parse_cli({"--help"});
  EXPECT_FALSE(help.command.has_value());
  EXPECT_EQ(help.exit_code, 0);
}
