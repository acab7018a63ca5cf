#include "lmix/policy.hpp"

#include <cmath>

#include "lmix/errors.hpp"

namespace lmix {

Policy::Policy(int horizon, int num_states, int num_actions)
    : horizon_(horizon), num_states_(num_states), num_actions_(num_actions) {
  require(horizon > 0 && num_states > 0 && num_actions > 0, "Policy: counts must be positive");
  probs_.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, 1.0 / num_actions);
}

std::span<const double> Policy::row(int h, int s) const {
  require(h >= 0 && h < horizon_ && s >= 0 && s < num_states_, "Policy: index out of range");
  return {probs_.data() + (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_,
          static_cast<std::size_t>(num_actions_)};
}

std::span<double> Policy::row(int h, int s) {
  require(h >= 0 && h < horizon_ && s >= 0 && s < num_states_, "Policy: index out of range");
  return {probs_.data() + (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_,
          static_cast<std::size_t>(num_actions_)};
}

void Policy::set_deterministic(int h, int s, int action) {
  require(action >= 0 && action < num_actions_, "Policy: action out of range");
  auto r = row(h, s);
  for (double& p : r) p = 0.0;
  r[action] = 1.0;
}

void Policy::check() const {
  require(!probs_.empty(), "Policy: empty policy");
  for (int h = 0; h < horizon_; ++h)
    for (int s = 0; s < num_states_; ++s) {
      double total = 0.0;
      for (double p : row(h, s)) {
        require(p >= 0.0 && std::isfinite(p), "Policy: negative or non-finite probability");
        total += p;
      }
      require(std::abs(total - 1.0) <= 1e-9, "Policy: row does not sum to one");
    }
}

}  // namespace lmix
