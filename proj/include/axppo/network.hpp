#pragma once

// Shared-trunk actor-critic MLP over a flat parameter vector.
//
// Canonical parameter layout: trunk layers in order, then the policy head,
// then the value head. Within a layer the weight matrix (out x in) is stored
// row-major, followed by its out biases.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "axppo/error.hpp"

namespace axppo {

using Rng = std::mt19937_64;

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct NetworkConfig {
  int obs_dim = 4;
  std::vector<int> hidden_sizes{64, 64};
  int action_count = 2;

  void validate() const {
    detail::require(obs_dim >= 1, "NetworkConfig: obs_dim must be >= 1");
    detail::require(action_count >= 2, "NetworkConfig: action_count must be >= 2");
    detail::require(!hidden_sizes.empty(), "NetworkConfig: at least one hidden layer required");
    for (int h : hidden_sizes) detail::require(h >= 1, "NetworkConfig: hidden sizes must be >= 1");
  }

  int last_hidden() const { return hidden_sizes.back(); }

  bool operator==(const NetworkConfig&) const = default;
};

// Position of one affine layer inside the flat parameter vector.
struct LayerSlot {
  Eigen::Index in = 0;
  Eigen::Index out = 0;
  Eigen::Index offset = 0;  // first weight; biases follow at offset + in * out

  Eigen::Index weight_count() const { return in * out; }
  Eigen::Index bias_offset() const { return offset + in * out; }
  Eigen::Index end() const { return offset + (in + 1) * out; }
};

struct NetworkLayout {
  std::vector<LayerSlot> trunk;
  LayerSlot policy_head;
  LayerSlot value_head;
  Eigen::Index parameter_count = 0;
};

inline NetworkLayout make_layout(const NetworkConfig& config) {
  config.validate();
  NetworkLayout layout;
  Eigen::Index offset = 0;
  Eigen::Index in = config.obs_dim;
  for (int h : config.hidden_sizes) {
    layout.trunk.push_back({in, h, offset});
    offset = layout.trunk.back().end();
    in = h;
  }
  layout.policy_head = {in, config.action_count, offset};
  offset = layout.policy_head.end();
  layout.value_head = {in, 1, offset};
  layout.parameter_count = layout.value_head.end();
  return layout;
}

inline std::size_t parameter_count(const NetworkConfig& config) {
  return static_cast<std::size_t>(make_layout(config).parameter_count);
}

struct ParameterSet {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  bool all_finite() const { return values.allFinite(); }
};

struct GradientSet {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
};

// Column-per-sample outputs of the two heads.
struct NetworkOutput {
  Eigen::MatrixXd logits;  // action_count x batch
  Eigen::VectorXd values;  // batch

  Eigen::Index batch_size() const { return values.size(); }
};

// Intermediates kept by forward() so backprop() does not re-run the network.
struct ForwardTrace {
  Eigen::MatrixXd inputs;                    // obs_dim x batch
  std::vector<Eigen::MatrixXd> pre_activations;  // per trunk layer, h x batch
  std::vector<Eigen::MatrixXd> activations;      // tanh(pre_activations)

  Eigen::Index batch_size() const { return inputs.cols(); }
};

struct ForwardResult {
  NetworkOutput output;
  ForwardTrace trace;
};

namespace detail {

inline Eigen::Map<const RowMajorMatrix> weights(const Eigen::VectorXd& flat, const LayerSlot& slot) {
  return {flat.data() + slot.offset, slot.out, slot.in};
}

inline Eigen::Map<RowMajorMatrix> weights(Eigen::VectorXd& flat, const LayerSlot& slot) {
  return {flat.data() + slot.offset, slot.out, slot.in};
}

inline auto biases(const Eigen::VectorXd& flat, const LayerSlot& slot) {
  return flat.segment(slot.bias_offset(), slot.out);
}

inline auto biases(Eigen::VectorXd& flat, const LayerSlot& slot) {
  return flat.segment(slot.bias_offset(), slot.out);
}

inline void check_params(const ParameterSet& params, const NetworkLayout& layout) {
  require(params.size() == layout.parameter_count,
          "parameter vector length " + std::to_string(params.size()) + " does not match network (" +
              std::to_string(layout.parameter_count) + ")");
}

}  // namespace detail

// Uniform [-b, b] weights with b = sqrt(6 / (fan_in + fan_out)); zero biases.
inline ParameterSet init_params(const NetworkConfig& config, Rng& rng) {
  const NetworkLayout layout = make_layout(config);
  ParameterSet params{Eigen::VectorXd::Zero(layout.parameter_count)};

  auto fill = [&](const LayerSlot& slot) {
    const double bound = std::sqrt(6.0 / static_cast<double>(slot.in + slot.out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < slot.weight_count(); ++i) params.values[slot.offset + i] = dist(rng);
  };
  for (const auto& slot : layout.trunk) fill(slot);
  fill(layout.policy_head);
  fill(layout.value_head);
  return params;
}

// obs_batch: one observation per row. Products are evaluated coefficient-wise
// so a sample's output does not depend on its position in the batch.
inline ForwardResult forward(const ParameterSet& params, const NetworkConfig& config,
                             const Eigen::Ref<const RowMajorMatrix>& obs_batch) {
  const NetworkLayout layout = make_layout(config);
  detail::check_params(params, layout);
  detail::require(obs_batch.cols() == config.obs_dim,
                  "forward: observation width " + std::to_string(obs_batch.cols()) + " != obs_dim " +
                      std::to_string(config.obs_dim));
  detail::require(obs_batch.rows() >= 1, "forward: empty batch");

  ForwardResult result;
  ForwardTrace& trace = result.trace;
  trace.inputs = obs_batch.transpose();

  const Eigen::MatrixXd* previous = &trace.inputs;
  for (const auto& slot : layout.trunk) {
    Eigen::MatrixXd z = detail::weights(params.values, slot).lazyProduct(*previous);
    z.colwise() += detail::biases(params.values, slot);
    trace.activations.push_back(z.array().tanh().matrix());
    trace.pre_activations.push_back(std::move(z));
    previous = &trace.activations.back();
  }

  const Eigen::MatrixXd& hidden = trace.activations.back();
  result.output.logits = detail::weights(params.values, layout.policy_head).lazyProduct(hidden);
  result.output.logits.colwise() += detail::biases(params.values, layout.policy_head);
  result.output.values = detail::weights(params.values, layout.value_head).lazyProduct(hidden).transpose();
  result.output.values.array() += params.values[layout.value_head.bias_offset()];
  return result;
}

// Sums per-sample contributions: callers pre-scale the partials (e.g. by 1/batch).
// d_logits is action_count x batch, d_values has one entry per sample.
inline GradientSet backprop(const ParameterSet& params, const NetworkConfig& config,
                            const ForwardTrace& trace, const Eigen::Ref<const Eigen::MatrixXd>& d_logits,
                            const Eigen::Ref<const Eigen::VectorXd>& d_values) {
  const NetworkLayout layout = make_layout(config);
  detail::check_params(params, layout);
  const Eigen::Index batch = trace.batch_size();
  detail::require(trace.activations.size() == layout.trunk.size(), "backprop: trace depth mismatch");
  detail::require(d_logits.rows() == config.action_count && d_logits.cols() == batch,
                  "backprop: d_logits shape mismatch");
  detail::require(d_values.size() == batch, "backprop: d_values length mismatch");

  GradientSet grad{Eigen::VectorXd::Zero(layout.parameter_count)};
  const Eigen::MatrixXd& hidden = trace.activations.back();

  detail::weights(grad.values, layout.policy_head) = d_logits * hidden.transpose();
  detail::biases(grad.values, layout.policy_head) = d_logits.rowwise().sum();
  detail::weights(grad.values, layout.value_head) = d_values.transpose() * hidden.transpose();
  grad.values[layout.value_head.bias_offset()] = d_values.sum();

  Eigen::MatrixXd d_hidden = detail::weights(params.values, layout.policy_head).transpose() * d_logits +
                             detail::weights(params.values, layout.value_head).transpose() * d_values.transpose();

  for (std::size_t k = layout.trunk.size(); k-- > 0;) {
    const LayerSlot& slot = layout.trunk[k];
    const Eigen::MatrixXd& act = trace.activations[k];
    const Eigen::MatrixXd d_pre = (d_hidden.array() * (1.0 - act.array().square())).matrix();
    const Eigen::MatrixXd& below = k == 0 ? trace.inputs : trace.activations[k - 1];
    detail::weights(grad.values, slot) = d_pre * below.transpose();
    detail::biases(grad.values, slot) = d_pre.rowwise().sum();
    if (k > 0) d_hidden = detail::weights(params.values, slot).transpose() * d_pre;
  }
  return grad;
}

// Central-difference gradient of a scalar function of the parameters.
template <typename LossFn>
GradientSet finite_diff_gradient(LossFn&& loss_fn, const ParameterSet& params, double h = 1e-5) {
  detail::require(h > 0.0, "finite_diff_gradient: step must be positive");
  GradientSet grad{Eigen::VectorXd::Zero(params.size())};
  ParameterSet probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double original = probe.values[i];
    probe.values[i] = original + h;
    const double plus = loss_fn(std::as_const(probe));
    probe.values[i] = original - h;
    const double minus = loss_fn(std::as_const(probe));
    probe.values[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus))
      throw NumericalError("finite_diff_gradient: non-finite loss at coordinate " + std::to_string(i));
    grad.values[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step_count = 0;

  static AdamState zeros(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

struct AdamResult {
  ParameterSet params;
  AdamState state;
};

inline AdamResult adam_step(const ParameterSet& params, const GradientSet& grads, const AdamState& state,
                            double lr) {
  detail::require(lr > 0.0, "adam_step: learning rate must be positive");
  detail::require(grads.size() == params.size() && state.first_moment.size() == params.size() &&
                      state.second_moment.size() == params.size(),
                  "adam_step: length mismatch");
  if (!grads.values.allFinite()) throw NumericalError("adam_step: non-finite gradient rejected");

  AdamResult next{params, state};
  AdamState& s = next.state;
  s.step_count += 1;
  s.first_moment = AdamState::kBeta1 * state.first_moment + (1.0 - AdamState::kBeta1) * grads.values;
  s.second_moment = AdamState::kBeta2 * state.second_moment +
                    (1.0 - AdamState::kBeta2) * grads.values.array().square().matrix();
  const double t = static_cast<double>(s.step_count);
  const double correction1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::kBeta2, t);
  next.params.values.array() -= lr * (s.first_moment.array() / correction1) /
                                ((s.second_moment.array() / correction2).sqrt() + AdamState::kEpsilon);
  return next;
}

}  // namespace axppo
