#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace tela {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Resource limits for one construction run on the current thread.
///
/// Explicit-state constructions call budget_check() whenever they create a
/// state; outside a BudgetScope the check is a no-op.
struct Budget {
  std::chrono::steady_clock::time_point deadline = std::chrono::steady_clock::time_point::max();
  std::size_t max_states = std::numeric_limits<std::size_t>::max();
};

namespace detail {
inline thread_local const Budget* current_budget = nullptr;
}

class BudgetScope {
 public:
  explicit BudgetScope(const Budget& b) : previous_(detail::current_budget) { detail::current_budget = &b; }
  ~BudgetScope() { detail::current_budget = previous_; }
  BudgetScope(const BudgetScope&) = delete;
  BudgetScope& operator=(const BudgetScope&) = delete;

 private:
  const Budget* previous_;
};

/// Throws BudgetExceeded if `states` exceeds the active state budget or the
/// deadline has passed. The clock is sampled every 256 calls.
inline void budget_check(std::size_t states) {
  const Budget* b = detail::current_budget;
  if (!b) return;
  if (states > b->max_states) throw BudgetExceeded("state budget exceeded");
  static thread_local unsigned ticks = 0;
  if ((++ticks & 0xffU) == 0 && std::chrono::steady_clock::now() > b->deadline)
    throw BudgetExceeded("time budget exceeded");
}

}  // namespace tela
