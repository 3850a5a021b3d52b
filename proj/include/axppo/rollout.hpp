#pragma once

// Fixed-horizon on-policy collection and GAE.

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "axppo/categorical.hpp"
#include "axppo/error.hpp"
#include "axppo/network.hpp"

namespace axppo {

struct Transition {
  std::vector<double> obs;
  int action = 0;
  double log_prob = 0.0;  // log pi(a|s) at collection time
  double value = 0.0;     // V(s) at collection time
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  // V of the post-truncation state; read only when truncated is set.
  double truncation_value = 0.0;

  bool done() const { return terminated || truncated; }
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  // V of the state following the last transition (the post-truncation state
  // when the last transition truncated an episode).
  double bootstrap_value = 0.0;

  int horizon() const { return static_cast<int>(transitions.size()); }
};

struct EpisodeStats {
  std::vector<double> completed_returns;

  int count() const { return static_cast<int>(completed_returns.size()); }
  double total() const { return std::accumulate(completed_returns.begin(), completed_returns.end(), 0.0); }
};

// Environment position carried across rollouts so episodes span updates.
template <typename State>
struct EnvCursor {
  State state{};
  double running_return = 0.0;
};

template <typename State>
struct RolloutResult {
  RolloutBuffer buffer;
  EpisodeStats stats;
  EnvCursor<State> cursor;
};

namespace detail {

template <typename Obs>
RowMajorMatrix single_row(const Obs& obs) {
  RowMajorMatrix row(1, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = obs[i];
  return row;
}

}  // namespace detail

// Observations stacked one per row, in buffer order.
inline RowMajorMatrix observation_matrix(const RolloutBuffer& buffer) {
  detail::require(!buffer.transitions.empty(), "observation_matrix: empty buffer");
  const auto width = static_cast<Eigen::Index>(buffer.transitions.front().obs.size());
  RowMajorMatrix obs(buffer.horizon(), width);
  for (int t = 0; t < buffer.horizon(); ++t)
    obs.row(t) = Eigen::Map<const Eigen::RowVectorXd>(buffer.transitions[t].obs.data(), width);
  return obs;
}

// Env must provide reset(Rng&) -> State, step(State, int) -> {next_state,
// reward, terminated, truncated}, and static observe(State) -> sequence.
// env_rng drives resets, action_rng drives action sampling.
template <typename Env>
RolloutResult<typename Env::State> collect_rollout(const ParameterSet& params, const NetworkConfig& config,
                                                   const Env& env, EnvCursor<typename Env::State> cursor,
                                                   int horizon, Rng& env_rng, Rng& action_rng) {
  detail::require(horizon >= 1, "collect_rollout: horizon must be >= 1");

  auto evaluate = [&](const auto& state) {
    const auto obs = Env::observe(state);
    ForwardResult fwd = forward(params, config, detail::single_row(obs));
    if (!fwd.output.logits.allFinite() || !fwd.output.values.allFinite())
      throw NumericalError("collect_rollout: non-finite network output");
    return std::pair{Eigen::VectorXd(fwd.output.logits.col(0)), fwd.output.values[0]};
  };

  RolloutResult<typename Env::State> result;
  result.buffer.transitions.reserve(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    const auto obs = Env::observe(cursor.state);
    auto [logits, value] = evaluate(cursor.state);
    const int action = sample_action(logits, action_rng);

    Transition tr;
    tr.obs.assign(obs.begin(), obs.end());
    tr.action = action;
    tr.log_prob = action_log_prob(logits, action);
    tr.value = value;

    const auto step = env.step(cursor.state, action);
    tr.reward = step.reward;
    tr.terminated = step.terminated;
    tr.truncated = step.truncated && !step.terminated;
    cursor.running_return += step.reward;

    if (tr.truncated) tr.truncation_value = evaluate(step.next_state).second;
    if (tr.done()) {
      result.stats.completed_returns.push_back(cursor.running_return);
      cursor.running_return = 0.0;
      cursor.state = env.reset(env_rng);
    } else {
      cursor.state = step.next_state;
    }
    result.buffer.transitions.push_back(std::move(tr));
  }

  const Transition& last = result.buffer.transitions.back();
  result.buffer.bootstrap_value = last.truncated ? last.truncation_value : evaluate(cursor.state).second;
  result.cursor = std::move(cursor);
  return result;
}

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd value_targets;
};

// delta_t = r_t + gamma * V(s_{t+1}) * (1 - terminated_t) - V(s_t)
// A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
inline GaeResult compute_gae(const RolloutBuffer& buffer, double gamma, double lambda) {
  detail::require(gamma >= 0.0 && gamma <= 1.0, "compute_gae: gamma must lie in [0, 1]");
  detail::require(lambda >= 0.0 && lambda <= 1.0, "compute_gae: lambda must lie in [0, 1]");
  const int n = buffer.horizon();
  detail::require(n >= 1, "compute_gae: empty buffer");

  GaeResult out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  double next_advantage = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const Transition& tr = buffer.transitions[t];
    double next_value = 0.0;
    if (tr.truncated)
      next_value = t == n - 1 ? buffer.bootstrap_value : tr.truncation_value;
    else if (!tr.terminated)
      next_value = t == n - 1 ? buffer.bootstrap_value : buffer.transitions[t + 1].value;

    const double delta = tr.reward + gamma * next_value - tr.value;
    const double carry = tr.done() ? 0.0 : gamma * lambda * next_advantage;
    out.advantages[t] = delta + carry;
    out.value_targets[t] = out.advantages[t] + tr.value;
    next_advantage = out.advantages[t];
  }
  return out;
}

// Mean of the returns finished in this rollout, or fallback when none finished.
inline double batch_mean_return(const EpisodeStats& stats, double fallback) {
  if (stats.count() == 0) return fallback;
  return stats.total() / stats.count();
}

}  // namespace axppo
