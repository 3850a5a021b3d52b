#pragma once

// CartPole-v1 dynamics: explicit Euler, reward 1 per step, 500-step limit.

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "axppo/error.hpp"
#include "axppo/network.hpp"

namespace axppo {

struct PhysicsConstants {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_pole_length = 0.5;
  double force_magnitude = 10.0;
  double dt = 0.02;
  double x_threshold = 2.4;
  double theta_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
  int max_episode_steps = 500;
  double reward_per_step = 1.0;

  double total_mass() const { return cart_mass + pole_mass; }
  double pole_mass_length() const { return pole_mass * half_pole_length; }
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int elapsed_steps = 0;

  std::array<double, 4> observation() const { return {x, x_dot, theta, theta_dot}; }

  bool operator==(const CartPoleState&) const = default;
};

struct StepResult {
  CartPoleState next_state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

// G_max: the largest undiscounted return an episode can collect.
inline double max_return(const PhysicsConstants& constants = {}) {
  return constants.max_episode_steps * constants.reward_per_step;
}

class CartPole {
 public:
  static constexpr int kObsDim = 4;
  static constexpr int kActionCount = 2;

  using State = CartPoleState;

  explicit CartPole(PhysicsConstants constants = {}) : constants_(constants) {}

  const PhysicsConstants& constants() const { return constants_; }

  CartPoleState reset(Rng& rng) const {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    CartPoleState s;
    s.x = dist(rng);
    s.x_dot = dist(rng);
    s.theta = dist(rng);
    s.theta_dot = dist(rng);
    return s;
  }

  // action 0 pushes left, 1 pushes right.
  StepResult step(const CartPoleState& state, int action) const {
    detail::require(action == 0 || action == 1, "CartPole::step: action must be 0 or 1");
    const PhysicsConstants& c = constants_;
    const double force = action == 1 ? c.force_magnitude : -c.force_magnitude;
    const double cos_theta = std::cos(state.theta);
    const double sin_theta = std::sin(state.theta);

    const double temp =
        (force + c.pole_mass_length() * state.theta_dot * state.theta_dot * sin_theta) / c.total_mass();
    const double theta_acc =
        (c.gravity * sin_theta - cos_theta * temp) /
        (c.half_pole_length * (4.0 / 3.0 - c.pole_mass * cos_theta * cos_theta / c.total_mass()));
    const double x_acc = temp - c.pole_mass_length() * theta_acc * cos_theta / c.total_mass();

    StepResult result;
    CartPoleState& next = result.next_state;
    next.x = state.x + c.dt * state.x_dot;
    next.x_dot = state.x_dot + c.dt * x_acc;
    next.theta = state.theta + c.dt * state.theta_dot;
    next.theta_dot = state.theta_dot + c.dt * theta_acc;
    next.elapsed_steps = state.elapsed_steps + 1;

    result.reward = c.reward_per_step;
    result.terminated = next.x < -c.x_threshold || next.x > c.x_threshold || next.theta < -c.theta_threshold ||
                        next.theta > c.theta_threshold;
    result.truncated = !result.terminated && next.elapsed_steps >= c.max_episode_steps;
    return result;
  }

  static std::array<double, 4> observe(const CartPoleState& state) { return state.observation(); }

 private:
  PhysicsConstants constants_;
};

}  // namespace axppo
