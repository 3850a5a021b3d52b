#pragma once

// Command-line front end: `train`, `sweep` and `eval` subcommands.
// Requires CLI11 on the include path.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "axppo/sweep.hpp"
#include "axppo/trainer.hpp"

namespace axppo {

struct TrainCommand {
  TrainConfig config;
  std::filesystem::path out = "runs/train";
};

struct SweepCommand {
  SweepSpec spec;
};

struct EvalCommand {
  std::filesystem::path checkpoint;
  int episodes = 20;
  std::uint64_t seed = 0;
};

using Command = std::variant<TrainCommand, SweepCommand, EvalCommand>;

// Either a command to run, or text to print and an exit status (help or usage error).
struct ParseOutcome {
  std::optional<Command> command;
  int exit_code = 0;
  std::string message;
};

namespace detail {

inline void add_hyperparameter_flags(CLI::App& sub, TrainConfig& c) {
  sub.add_option("--total-steps", c.total_env_steps, "Environment steps per run")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub.add_option("--horizon", c.horizon, "Environment steps per update")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub.add_option("--epochs", c.epochs, "Optimization passes per update")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--minibatch", c.minibatch_size, "Minibatch size")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub.add_option("--lr", c.lr, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--c1", c.c1, "Value loss weight")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub.add_option("--normalize-advantages", c.normalize_advantages, "Rescale advantages to mean 0, std 1")
      ->capture_default_str();
  sub.add_option("--gamma", c.gamma, "Discount")->capture_default_str();
  sub.add_option("--lambda", c.lambda, "GAE lambda")->capture_default_str();
  sub.add_option("--eval-episodes", c.eval_episodes, "Episodes in the final evaluation")->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace detail

inline ParseOutcome parse_cli(std::vector<std::string> args) {
  CLI::App app{"PPO and adaptive-entropy PPO on CartPole-v1", "axppo"};
  app.require_subcommand(1);

  TrainCommand train_cmd;
  std::string algo = "standard";
  auto* train_sub = app.add_subcommand("train", "Train a single agent and evaluate it");
  train_sub->add_option("--algo", algo, "standard | adaptive")
      ->capture_default_str()
      ->check(CLI::IsMember({"standard", "adaptive"}));
  train_sub->add_option("--entropy-coef", train_cmd.config.c2_base, "Entropy coefficient c2")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  train_sub->add_option("--tau", train_cmd.config.tau, "Return window length in updates (adaptive)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_sub->add_option("--seed", train_cmd.config.seed, "Master seed")->capture_default_str();
  train_sub->add_option("--out", train_cmd.out, "Output directory")->capture_default_str();
  detail::add_hyperparameter_flags(*train_sub, train_cmd.config);

  SweepCommand sweep_cmd;
  bool no_standard = false;
  auto* sweep_sub = app.add_subcommand("sweep", "Run the coefficient x tau grid");
  sweep_sub->add_option("--coefs", sweep_cmd.spec.coefficient_grid, "Comma-separated entropy coefficients")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sweep_sub->add_option("--taus", sweep_cmd.spec.tau_grid, "Comma-separated window lengths")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep_sub->add_option("--seeds", sweep_cmd.spec.seeds_per_cell, "Seeds per cell")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep_sub->add_option("--base-seed", sweep_cmd.spec.base_seed, "First seed of every cell")->capture_default_str();
  sweep_sub->add_option("--jobs", sweep_cmd.spec.parallelism, "Concurrent runs")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep_sub->add_option("--out", sweep_cmd.spec.output_dir, "Output directory")->capture_default_str();
  sweep_sub->add_flag("--no-standard", no_standard, "Skip the standard PPO row");
  detail::add_hyperparameter_flags(*sweep_sub, sweep_cmd.spec.base);

  EvalCommand eval_cmd;
  auto* eval_sub = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  eval_sub->add_option("--checkpoint", eval_cmd.checkpoint, "Checkpoint file")->required();
  eval_sub->add_option("--episodes", eval_cmd.episodes, "Episodes to run")->capture_default_str()
      ->check(CLI::PositiveNumber);
  eval_sub->add_option("--seed", eval_cmd.seed, "Evaluation seed")->capture_default_str();

  ParseOutcome outcome;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    outcome.message = app.help();
    return outcome;
  } catch (const CLI::ParseError& e) {
    outcome.exit_code = e.get_exit_code() == 0 ? 0 : 2;
    outcome.message = e.what();
    if (outcome.message.empty()) outcome.message = app.help();
    return outcome;
  }

  try {
    if (train_sub->parsed()) {
      train_cmd.config.mode = algo == "adaptive" ? Mode::kAdaptive : Mode::kStandard;
      train_cmd.config.validate();
      outcome.command = train_cmd;
    } else if (sweep_sub->parsed()) {
      sweep_cmd.spec.include_standard = !no_standard;
      sweep_cmd.spec.validate();
      sweep_cmd.spec.base.validate();
      outcome.command = sweep_cmd;
    } else {
      outcome.command = eval_cmd;
    }
  } catch (const ContractViolation& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
  }
  return outcome;
}

inline ParseOutcome parse_cli(int argc, const char* const* argv) {
  return parse_cli(std::vector<std::string>(argv + 1, argv + argc));
}

}  // namespace axppo
