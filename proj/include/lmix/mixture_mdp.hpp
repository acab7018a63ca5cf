#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "lmix/rng.hpp"

// Finite linear mixture MDPs.
//
// Indexing conventions used across the library: states, actions and stages are
// 0-based (stage h runs over 0..H-1, so the value clip [0, H-h+1] of the 1-based
// write-up becomes [0, H-h]); episodes are 1-based (k = 1..K) because the
// confidence radii are functions of k.

namespace lmix {

inline constexpr double kProbTolerance = 1e-9;

// Known feature map phi(s'|s,a) in R^d. Storage is one d x S matrix per (s,a)
// whose column s' is phi(s'|s,a), so phi_V(s,a) is a matrix-vector product.
class FeatureMap {
 public:
  FeatureMap(int num_states, int num_actions, int dim);

  // `row_major` is laid out as [s][a][s'][j].
  FeatureMap(int num_states, int num_actions, int dim, std::span<const double> row_major);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return dim_; }

  const Eigen::MatrixXd& block(int s, int a) const;
  Eigen::VectorXd feature(int s, int a, int next_state) const;
  void set_feature(int s, int a, int next_state, const Eigen::VectorXd& value);

  // phi_V(s,a) = sum_{s'} phi(s'|s,a) V(s').
  Eigen::VectorXd phi_v(int s, int a, std::span<const double> v) const;

  // All (s,a) at once; column s*A + a holds phi_V(s,a).
  Eigen::MatrixXd phi_v(std::span<const double> v) const;

  std::vector<double> row_major() const;

 private:
  void check_state_action(int s, int a) const;

  int num_states_;
  int num_actions_;
  int dim_;
  std::vector<Eigen::MatrixXd> blocks_;
};

// P_h(s'|s,a) = <phi(s'|s,a), theta_h>. Immutable after construction; the
// constructor checks shapes only, validate() checks the model invariants.
class MixtureMdp {
 public:
  MixtureMdp(FeatureMap features, std::vector<Eigen::VectorXd> theta, double bound,
             int initial_state);

  int num_states() const { return features_.num_states(); }
  int num_actions() const { return features_.num_actions(); }
  int horizon() const { return static_cast<int>(theta_.size()); }
  int dim() const { return features_.dim(); }
  double bound() const { return bound_; }
  int initial_state() const { return initial_state_; }

  const FeatureMap& features() const { return features_; }
  const Eigen::VectorXd& theta(int h) const;

  double transition_prob(int h, int s, int a, int next_state) const;
  std::vector<double> transition_row(int h, int s, int a) const;

  Eigen::MatrixXd phi_v(std::span<const double> v) const { return features_.phi_v(v); }

  // [P_h V](s,a) = <phi_V(s,a), theta_h>.
  double expected_next_value(int h, std::span<const double> v, int s, int a) const;

  // [P_h V^2](s,a) - ([P_h V](s,a))^2, with round-off below zero clipped.
  double exact_variance(int h, std::span<const double> v, int s, int a) const;

  int sample_transition(int h, int s, int a, Rng& rng) const;

 private:
  void check_stage(int h) const;

  FeatureMap features_;
  std::vector<Eigen::VectorXd> theta_;
  double bound_;
  int initial_state_;
};

struct Violation {
  std::string constraint;
  std::string location;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks the simplex property of every induced row, the theta norm bound, the
// initial state, and ||phi_V(s,a)||_2 <= 1 over a fixed battery of V: S -> [0,1]
// (indicators, all-ones, and seeded random vectors).
ValidationReport validate(const MixtureMdp& mdp);

// r[h][s][a] for one episode.
class RewardTable {
 public:
  RewardTable() = default;
  RewardTable(int horizon, int num_states, int num_actions, double fill = 0.0);

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double& operator()(int h, int s, int a) { return data_[index(h, s, a)]; }
  double operator()(int h, int s, int a) const { return data_[index(h, s, a)]; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  bool in_unit_interval() const;
  bool operator==(const RewardTable&) const = default;

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }

  int horizon_ = 0;
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> data_;
};

// Reward tables for episodes 1..K.
class RewardSchedule {
 public:
  RewardSchedule() = default;
  explicit RewardSchedule(std::vector<RewardTable> tables);

  int num_episodes() const { return static_cast<int>(tables_.size()); }
  const RewardTable& episode(int k) const;
  void append(RewardTable table);

  // Sum over the first `episodes` tables (all of them by default).
  RewardTable aggregated(int episodes = -1) const;

 private:
  std::vector<RewardTable> tables_;
};

}  // namespace lmix
