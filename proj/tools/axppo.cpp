#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <variant>

#include "axppo/checkpoint.hpp"
#include "axppo/cli.hpp"

namespace {

using namespace axppo;

int run(const TrainCommand& cmd) {
  const TrainConfig& c = cmd.config;
  std::filesystem::create_directories(cmd.out);
  const RunSpec spec{c.mode, c.c2_base, c.mode == Mode::kAdaptive ? std::optional<int>(c.tau) : std::nullopt, c.seed};
  const std::filesystem::path log_path = cmd.out / (run_stem(spec) + ".csv");

  const TrainResult trained = train(c, [&](const UpdateRecord& r) {
    if ((r.update_index + 1) % 10 == 0)
      std::printf("update %4d  steps %7lld  batch_return %7.1f  c2_eff %.4f\n", r.update_index + 1,
                  r.env_steps_so_far, r.batch_mean_return, r.c2_effective);
  });
  std::ofstream log(log_path);
  write_update_log(log, trained.records);
  if (!trained.ok()) {
    std::fprintf(stderr, "%s\n", trained.error->c_str());
    return 1;
  }
  const std::filesystem::path ckpt = cmd.out / (run_stem(spec) + ".ckpt");
  save_checkpoint(ckpt.string(), c.network, trained.params);
  const EvalReport report = evaluate(trained.params, c);
  std::printf("final mean return %.1f (std %.1f over %d episodes)\nlog %s\ncheckpoint %s\n", report.mean_return,
              report.std, c.eval_episodes, log_path.c_str(), ckpt.c_str());
  return 0;
}

int run(const SweepCommand& cmd) {
  const auto results = run_sweep(cmd.spec, [](const RunResult& r, std::size_t done, std::size_t total) {
    std::printf("[%zu/%zu] %s c2=%s tau=%s seed=%llu -> %s (%.1fs)\n", done, total, to_string(r.mode),
                format_coefficient(r.c2_base).c_str(), r.tau ? std::to_string(*r.tau).c_str() : "na",
                static_cast<unsigned long long>(r.seed),
                r.ok() ? std::to_string(r.final_mean_return).c_str() : "diverged", r.wall_time_s);
    std::fflush(stdout);
  });
  write_sweep_outputs(cmd.spec, results);
  std::cout << render_results(results, ReportFormat::kMarkdown);
  return 0;
}

int run(const EvalCommand& cmd) {
  const Checkpoint ckpt = load_checkpoint(cmd.checkpoint.string());
  Rng rng(cmd.seed);
  const EvalReport report = evaluate(ckpt.params, ckpt.config, rng, cmd.episodes);
  std::printf("mean return %.2f  std %.2f  episodes %d\n", report.mean_return, report.std, cmd.episodes);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const ParseOutcome parsed = parse_cli(argc, argv);
  if (!parsed.command) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message << '\n';
    return parsed.exit_code;
  }
  try {
    return std::visit([](const auto& cmd) { return run(cmd); }, *parsed.command);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
