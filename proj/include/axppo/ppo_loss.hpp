#pragma once

// Clipped-surrogate PPO loss with value and entropy terms, its analytic
// partials w.r.t. the network outputs, and the epoch/minibatch update.
//
// The objective is maximized in its textbook form; here we minimize
//   total = -clip_term + c1 * value_term - c2_effective * entropy_term
// where every term is a minibatch mean.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "axppo/categorical.hpp"
#include "axppo/error.hpp"
#include "axppo/network.hpp"
#include "axppo/rollout.hpp"

namespace axppo {

struct LossCoefficients {
  double c1 = 0.5;
  double c2_base = 0.0;
  double clip_epsilon = 0.2;
  double c2_effective = 0.0;  // c2_base (standard) or g_recent * c2_base (adaptive)
};

struct LossBreakdown {
  double clip_term = 0.0;     // mean clipped surrogate, before negation
  double value_term = 0.0;    // mean 0.5 * (V - target)^2
  double entropy_term = 0.0;  // mean entropy
  double total = 0.0;
};

// Per-sample training data aligned with a NetworkOutput batch.
struct MinibatchData {
  std::vector<int> actions;
  Eigen::VectorXd old_log_probs;
  Eigen::VectorXd advantages;
  Eigen::VectorXd value_targets;

  Eigen::Index size() const { return static_cast<Eigen::Index>(actions.size()); }
};

struct OutputGradients {
  Eigen::MatrixXd d_logits;  // action_count x batch
  Eigen::VectorXd d_values;
};

inline double clipped_surrogate_objective(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

namespace detail {

inline void check_loss_inputs(const NetworkOutput& outputs, const MinibatchData& data,
                              const LossCoefficients& coeffs) {
  const Eigen::Index n = data.size();
  require(n >= 1, "loss: empty minibatch");
  require(outputs.batch_size() == n && outputs.logits.cols() == n && data.old_log_probs.size() == n &&
              data.advantages.size() == n && data.value_targets.size() == n,
          "loss: minibatch length mismatch");
  require(coeffs.c1 >= 0.0 && coeffs.c2_effective >= 0.0 && coeffs.clip_epsilon > 0.0,
          "loss: invalid coefficients");
  if (!outputs.logits.allFinite() || !outputs.values.allFinite() || !data.old_log_probs.allFinite() ||
      !data.advantages.allFinite() || !data.value_targets.allFinite())
    throw NumericalError("loss: non-finite input");
}

}  // namespace detail

inline LossBreakdown loss_breakdown(const NetworkOutput& outputs, const MinibatchData& data,
                                    const LossCoefficients& coeffs) {
  detail::check_loss_inputs(outputs, data, coeffs);
  const Eigen::Index n = data.size();
  LossBreakdown out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto logits = outputs.logits.col(i);
    const double ratio = std::exp(action_log_prob(logits, data.actions[i]) - data.old_log_probs[i]);
    out.clip_term += clipped_surrogate_objective(ratio, data.advantages[i], coeffs.clip_epsilon);
    const double err = outputs.values[i] - data.value_targets[i];
    out.value_term += 0.5 * err * err;
    out.entropy_term += categorical_entropy(logits);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.clip_term *= inv_n;
  out.value_term *= inv_n;
  out.entropy_term *= inv_n;
  out.total = -out.clip_term + coeffs.c1 * out.value_term - coeffs.c2_effective * out.entropy_term;
  if (!std::isfinite(out.total)) throw NumericalError("loss: non-finite total");
  return out;
}

// Exact partials of loss_breakdown(...).total, already divided by the batch size.
inline OutputGradients loss_output_gradients(const NetworkOutput& outputs, const MinibatchData& data,
                                             const LossCoefficients& coeffs) {
  detail::check_loss_inputs(outputs, data, coeffs);
  const Eigen::Index n = data.size();
  const Eigen::Index actions = outputs.logits.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double eps = coeffs.clip_epsilon;

  OutputGradients g{Eigen::MatrixXd::Zero(actions, n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto logits = outputs.logits.col(i);
    const int a = data.actions[i];
    const Eigen::VectorXd log_p = log_softmax(logits);
    const Eigen::VectorXd p = log_p.array().exp().matrix();
    const double ratio = std::exp(log_p[a] - data.old_log_probs[i]);
    const double adv = data.advantages[i];

    // The clipped branch is constant in theta; it is the min only when it binds strictly.
    const bool clipped = (adv > 0.0 && ratio > 1.0 + eps) || (adv < 0.0 && ratio < 1.0 - eps);
    const double d_surrogate_d_logp = clipped ? 0.0 : ratio * adv;

    // d log p_a / d z_j = [j == a] - p_j
    Eigen::VectorXd d_logp = -p;
    d_logp[a] += 1.0;

    double entropy = 0.0;
    for (Eigen::Index j = 0; j < actions; ++j)
      if (p[j] > 0.0) entropy -= p[j] * log_p[j];
    // dH/dz_j = -p_j (ln p_j + H)
    Eigen::VectorXd d_entropy(actions);
    for (Eigen::Index j = 0; j < actions; ++j) d_entropy[j] = p[j] > 0.0 ? -p[j] * (log_p[j] + entropy) : 0.0;

    g.d_logits.col(i) = inv_n * (-d_surrogate_d_logp * d_logp - coeffs.c2_effective * d_entropy);
    g.d_values[i] = inv_n * coeffs.c1 * (outputs.values[i] - data.value_targets[i]);
  }
  return g;
}

// Loss of a minibatch evaluated directly from parameters (used for checks and re-evaluation).
inline LossBreakdown minibatch_loss(const ParameterSet& params, const NetworkConfig& config,
                                    const Eigen::Ref<const RowMajorMatrix>& obs, const MinibatchData& data,
                                    const LossCoefficients& coeffs) {
  return loss_breakdown(forward(params, config, obs).output, data, coeffs);
}

// Analytic parameter gradient of minibatch_loss(...).total.
inline GradientSet minibatch_gradient(const ParameterSet& params, const NetworkConfig& config,
                                      const Eigen::Ref<const RowMajorMatrix>& obs, const MinibatchData& data,
                                      const LossCoefficients& coeffs) {
  const ForwardResult fwd = forward(params, config, obs);
  const OutputGradients partials = loss_output_gradients(fwd.output, data, coeffs);
  return backprop(params, config, fwd.trace, partials.d_logits, partials.d_values);
}

// Mean 0 / std 1 with a 1e-8 guard on the standard deviation.
inline Eigen::VectorXd normalize_advantages(const Eigen::Ref<const Eigen::VectorXd>& advantages) {
  const double mean = advantages.mean();
  const double var = (advantages.array() - mean).square().mean();
  return ((advantages.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();
}

struct PpoHyper {
  int epochs = 4;
  int minibatch_size = 64;
  double lr = 3e-4;
  bool normalize_advantages = true;
};

struct PpoUpdateResult {
  ParameterSet params;
  AdamState adam;
  LossBreakdown last_epoch_mean;
};

inline PpoUpdateResult ppo_update(const ParameterSet& params, const NetworkConfig& config, const AdamState& adam,
                                  const RolloutBuffer& buffer, const Eigen::Ref<const Eigen::VectorXd>& advantages,
                                  const Eigen::Ref<const Eigen::VectorXd>& value_targets,
                                  const LossCoefficients& coeffs, const PpoHyper& hyper, Rng& rng) {
  const int n = buffer.horizon();
  detail::require(n >= 1 && advantages.size() == n && value_targets.size() == n,
                  "ppo_update: buffer, advantages and targets must align");
  detail::require(hyper.epochs >= 0, "ppo_update: epochs must be >= 0");
  detail::require(hyper.minibatch_size >= 1 && n % hyper.minibatch_size == 0,
                  "ppo_update: minibatch_size must divide the horizon");

  PpoUpdateResult result{params, adam, {}};
  if (hyper.epochs == 0) return result;

  const RowMajorMatrix all_obs = observation_matrix(buffer);
  const Eigen::VectorXd norm_adv =
      hyper.normalize_advantages ? normalize_advantages(advantages) : Eigen::VectorXd(advantages);
  const int mb = hyper.minibatch_size;
  const int minibatches = n / mb;

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  RowMajorMatrix mb_obs(mb, all_obs.cols());
  MinibatchData data;
  data.actions.resize(static_cast<std::size_t>(mb));
  data.old_log_probs.resize(mb);
  data.advantages.resize(mb);
  data.value_targets.resize(mb);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossBreakdown epoch_sum;
    for (int b = 0; b < minibatches; ++b) {
      for (int k = 0; k < mb; ++k) {
        const int idx = order[static_cast<std::size_t>(b * mb + k)];
        const Transition& tr = buffer.transitions[static_cast<std::size_t>(idx)];
        mb_obs.row(k) = all_obs.row(idx);
        data.actions[static_cast<std::size_t>(k)] = tr.action;
        data.old_log_probs[k] = tr.log_prob;
        data.advantages[k] = norm_adv[idx];
        data.value_targets[k] = value_targets[idx];
      }
      const ForwardResult fwd = forward(result.params, config, mb_obs);
      const LossBreakdown loss = loss_breakdown(fwd.output, data, coeffs);
      const OutputGradients partials = loss_output_gradients(fwd.output, data, coeffs);
      const GradientSet grad = backprop(result.params, config, fwd.trace, partials.d_logits, partials.d_values);
      AdamResult stepped = adam_step(result.params, grad, result.adam, hyper.lr);
      result.params = std::move(stepped.params);
      result.adam = std::move(stepped.state);

      epoch_sum.clip_term += loss.clip_term;
      epoch_sum.value_term += loss.value_term;
      epoch_sum.entropy_term += loss.entropy_term;
      epoch_sum.total += loss.total;
    }
    const double inv = 1.0 / minibatches;
    result.last_epoch_mean = {epoch_sum.clip_term * inv, epoch_sum.value_term * inv, epoch_sum.entropy_term * inv,
                              epoch_sum.total * inv};
  }
  if (!result.params.all_finite()) throw NumericalError("ppo_update: parameters diverged");
  return result;
}

}  // namespace axppo
