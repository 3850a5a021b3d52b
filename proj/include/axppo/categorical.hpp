#pragma once

// Categorical distribution over softmax(logits), log-sum-exp stabilized.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "axppo/error.hpp"
#include "axppo/network.hpp"

namespace axppo {

inline double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double peak = logits.maxCoeff();
  return peak + std::log((logits.array() - peak).exp().sum());
}

inline Eigen::VectorXd log_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  return (logits.array() - log_sum_exp(logits)).matrix();
}

inline Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double peak = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - peak).exp().matrix();
  return p / p.sum();
}

// H = -sum p_i ln p_i. Terms with p_i == 0 contribute nothing.
inline double categorical_entropy(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const Eigen::VectorXd log_p = log_softmax(logits);
  double h = 0.0;
  for (Eigen::Index i = 0; i < log_p.size(); ++i) {
    const double p = std::exp(log_p[i]);
    if (p > 0.0) h -= p * log_p[i];
  }
  return h;
}

inline double action_log_prob(const Eigen::Ref<const Eigen::VectorXd>& logits, int action) {
  detail::require(action >= 0 && action < logits.size(),
                  "action_log_prob: action " + std::to_string(action) + " out of range");
  return logits[action] - log_sum_exp(logits);
}

inline int sample_action(const Eigen::Ref<const Eigen::VectorXd>& logits, Rng& rng) {
  const Eigen::VectorXd p = softmax(logits);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  for (Eigen::Index i = 0; i + 1 < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);
}

}  // namespace axppo
