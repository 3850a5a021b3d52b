#pragma once

// Recent-return scaling of the entropy coefficient.
//
// The window keeps the last tau per-update batch mean returns, the current
// update included. g_recent() is their mean divided by g_max, so it lies in
// [0, 1]; before tau updates exist it averages whatever is present, and an
// empty window yields 0.

#include <deque>
#include <numeric>
#include <string>

#include "axppo/cartpole.hpp"
#include "axppo/error.hpp"

namespace axppo {

enum class Mode { kStandard, kAdaptive };

inline const char* to_string(Mode mode) { return mode == Mode::kStandard ? "standard" : "adaptive"; }

class ReturnWindow {
 public:
  explicit ReturnWindow(int capacity, double g_max = max_return()) : capacity_(capacity), g_max_(g_max) {
    detail::require(capacity >= 1, "ReturnWindow: capacity (tau) must be >= 1");
    detail::require(g_max > 0.0, "ReturnWindow: g_max must be positive");
  }

  void push(double mean_return) {
    detail::require(mean_return >= 0.0 && mean_return <= g_max_,
                    "ReturnWindow::push: batch return " + std::to_string(mean_return) + " outside [0, " +
                        std::to_string(g_max_) + "]");
    entries_.push_back(mean_return);
    if (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
  }

  double g_recent() const {
    if (entries_.empty()) return 0.0;
    const double sum = std::accumulate(entries_.begin(), entries_.end(), 0.0);
    return sum / static_cast<double>(entries_.size()) / g_max_;
  }

  int capacity() const { return capacity_; }
  double g_max() const { return g_max_; }
  const std::deque<double>& entries() const { return entries_; }

 private:
  int capacity_;
  double g_max_;
  std::deque<double> entries_;
};

inline ReturnWindow push_batch_return(ReturnWindow window, double mean_return) {
  window.push(mean_return);
  return window;
}

inline double g_recent(const ReturnWindow& window) { return window.g_recent(); }

inline double effective_entropy_coef(Mode mode, const ReturnWindow& window, double c2_base) {
  detail::require(c2_base >= 0.0, "effective_entropy_coef: c2_base must be >= 0");
  return mode == Mode::kStandard ? c2_base : window.g_recent() * c2_base;
}

}  // namespace axppo
