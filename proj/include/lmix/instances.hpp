#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmix/mixture_mdp.hpp"
#include "lmix/rng.hpp"

namespace lmix {

// Hypercube-action family with a rewarding absorbing state.
//
// States: index j-1 is the chain state s_j (j = 1..H), index H is the absorbing
// sink s_{H+1} and index H+1 the rewarding absorbing state s_{H+2}. Actions are
// the 2^(d-1) points of {-1,+1}^(d-1); see hard_action_vector(). From any chain
// state at stage h the process reaches s_{H+2} with probability
// 1/H + <mu_h, a> and otherwise advances along the chain.
struct HardInstanceParams {
  int dim = 4;
  int horizon = 3;
  double gap = 0.0;                     // Delta; <= 0 selects default_gap(dim, horizon)
  std::vector<std::vector<int>> signs;  // per stage, d-1 entries in {-1,+1}; empty = all +1

  double escape_prob() const { return 1.0 / horizon; }  // delta = 1/H
  double resolved_gap() const;
  double alpha() const;
  double beta() const;
  int num_actions() const { return 1 << (dim - 1); }
};

// Delta = delta / (2(d-1)).
double default_gap(int dim, int horizon);

// Draws a sign pattern mu_h / Delta for every stage.
std::vector<std::vector<int>> random_signs(int dim, int horizon, Rng& rng);

// Coordinate i of action a is +1 when bit i of a is set, else -1.
std::vector<int> hard_action_vector(int action, int dim);

// The action equal to sign(mu_h).
int hard_best_action(const HardInstanceParams& params, int h);

struct HardInstance {
  MixtureMdp mdp;
  RewardSchedule schedule;
};

// Throws std::invalid_argument when d < 4, H < 3, d > 12, Delta <= 0,
// (d-1) Delta > 1/H, or the sign pattern is malformed.
HardInstance build_hard_instance(const HardInstanceParams& params, int num_episodes);

// Reward 1 at s_{H+2} for every stage and action, 0 elsewhere.
RewardTable hard_reward_table(const HardInstanceParams& params);

// d base kernels Q_j with Dirichlet(1) rows; phi(s'|s,a)_j = Q_j(s'|s,a)/sqrt(d)
// and theta_h = sqrt(d) w_h for a Dirichlet(1) weight vector w_h.
MixtureMdp build_random_instance(std::uint64_t seed, int num_states, int num_actions, int dim,
                                 int horizon);

RewardTable random_reward_table(int horizon, int num_states, int num_actions, Rng& rng);

// Per-run visit counts of (h, s, a) over completed episodes.
class VisitHistory {
 public:
  VisitHistory(int horizon, int num_states, int num_actions);

  int episodes() const { return episodes_; }
  int count(int h, int s, int a) const { return counts_(h, s, a); }

  // `states` holds s_1..s_H (at least H entries), `actions` a_1..a_H.
  void record(std::span<const int> states, std::span<const int> actions);

 private:
  int episodes_ = 0;
  RewardTable counts_;
};

enum class AdversaryKind { fixed, iid_uniform, periodic, adaptive };

std::string to_string(AdversaryKind kind);
AdversaryKind adversary_kind_from_string(const std::string& name);

class Adversary {
 public:
  static Adversary fixed(RewardTable table);
  static Adversary iid_uniform(int horizon, int num_states, int num_actions);
  // Episode k receives tables[(k-1) % tables.size()].
  static Adversary periodic(std::vector<RewardTable> tables);
  // r_h^k(s,a) = 1 - (visits of (h,s,a) in episodes < k) / (k-1); all ones at k = 1.
  static Adversary adaptive(int horizon, int num_states, int num_actions);

  AdversaryKind kind() const { return kind_; }

  // Reward table for episode k, fixed before the episode is played.
  RewardTable next_reward(int k, const VisitHistory& history, Rng& rng) const;

 private:
  Adversary(AdversaryKind kind, int horizon, int num_states, int num_actions,
            std::vector<RewardTable> tables);

  AdversaryKind kind_;
  int horizon_;
  int num_states_;
  int num_actions_;
  std::vector<RewardTable> tables_;
};

}  // namespace lmix
