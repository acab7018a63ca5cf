#pragma once

#include <span>
#include <vector>

namespace lmix {

// Tabular stochastic policy pi_h(a|s), stored as [h][s][a].
class Policy {
 public:
  Policy() = default;
  Policy(int horizon, int num_states, int num_actions);  // uniform

  static Policy uniform(int horizon, int num_states, int num_actions) {
    return Policy(horizon, num_states, num_actions);
  }

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::span<const double> row(int h, int s) const;
  std::span<double> row(int h, int s);

  double operator()(int h, int s, int a) const { return row(h, s)[a]; }

  // Puts all mass on `action` at (h, s).
  void set_deterministic(int h, int s, int action);

  // Throws ContractViolation unless every row is a distribution (sum 1 +- 1e-9).
  void check() const;

  bool operator==(const Policy&) const = default;

 private:
  int horizon_ = 0;
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

}  // namespace lmix
