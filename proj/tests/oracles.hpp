#pragma once

// Test-only oracles and generators. Nothing here calls into the code paths it
// is used to check beyond the public forward()/loss entry points.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "axppo/network.hpp"
#include "axppo/ppo_loss.hpp"

namespace axppo::oracle {

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

struct SyntheticMinibatch {
  ParameterSet params;
  RowMajorMatrix obs;
  MinibatchData data;
  LossCoefficients coeffs;
};

// Random parameters and a minibatch whose old log-probs sit near the current
// policy, so both clipped and unclipped samples occur.
inline SyntheticMinibatch make_synthetic_minibatch(const NetworkConfig& config, int batch, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick_action(0, config.action_count - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticMinibatch mb;
  mb.params = init_params(config, rng);
  for (Eigen::Index i = 0; i < mb.params.size(); ++i) mb.params.values[i] += 0.05 * normal(rng);

  mb.obs.resize(batch, config.obs_dim);
  for (Eigen::Index r = 0; r < mb.obs.rows(); ++r)
    for (Eigen::Index c = 0; c < mb.obs.cols(); ++c) mb.obs(r, c) = normal(rng);

  const NetworkOutput out = forward(mb.params, config, mb.obs).output;
  mb.data.actions.resize(static_cast<std::size_t>(batch));
  mb.data.old_log_probs.resize(batch);
  mb.data.advantages.resize(batch);
  mb.data.value_targets.resize(batch);
  for (int i = 0; i < batch; ++i) {
    const int a = pick_action(rng);
    mb.data.actions[static_cast<std::size_t>(i)] = a;
    mb.data.old_log_probs[i] = action_log_prob(out.logits.col(i), a) + 0.3 * normal(rng);
    mb.data.advantages[i] = normal(rng);
    mb.data.value_targets[i] = normal(rng);
  }
  mb.coeffs.c1 = 0.5;
  mb.coeffs.clip_epsilon = 0.2;
  mb.coeffs.c2_base = 0.8;
  mb.coeffs.c2_effective = 0.8 * unit(rng);
  return mb;
}

// Undiscounted Monte-Carlo return-to-go within each episode, by brute-force summation.
inline std::vector<double> monte_carlo_returns(const std::vector<double>& rewards, const std::vector<bool>& done) {
  std::vector<double> out(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    double sum = 0.0;
    for (std::size_t k = t; k < rewards.size(); ++k) {
      sum += rewards[k];
      if (done[k]) break;
    }
    out[t] = sum;
  }
  return out;
}

}  // namespace axppo::oracle
