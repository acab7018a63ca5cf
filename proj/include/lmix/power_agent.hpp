#pragma once

#include <string>
#include <vector>

#include "lmix/estimator.hpp"
#include "lmix/instances.hpp"
#include "lmix/mixture_mdp.hpp"
#include "lmix/policy.hpp"
#include "lmix/rng.hpp"
#include "lmix/run_log.hpp"

namespace lmix {

enum class Variant { power_bernstein, hoeffding_unit_weight, uniform_policy };

std::string to_string(Variant variant);
// Throws ConfigError for unknown names.
Variant variant_from_string(const std::string& name);

struct AgentConfig {
  double alpha = 0.1;  // mirror-descent step size
  EstimatorConfig estimator;
  Variant variant = Variant::power_bernstein;

  void check() const;
};

// sqrt(log|A| / (H^2 K)).
double auto_learning_rate(int num_actions, int horizon, int episodes);

// One exponential-weights step: next(a) proportional to prev(a) exp(alpha q(a)).
// This is the minimizer of -<q, pi> + KL(pi || prev) / alpha over the simplex.
std::vector<double> exponential_weights_step(std::span<const double> prev,
                                             std::span<const double> q, double alpha);

// Optimistic policy optimization over a known feature map.
//
// The agent sees the feature map, its own sampled transitions and the revealed
// reward tables; it is never handed theta_h or a transition probability.
//
// The policy is kept as the running sum of past optimistic Q tables:
// pi_h^k(a|s) is proportional to exp(alpha * sum_{i<k} Q_{i,h}(s,a)), which is
// the multiplicative update pi^k ~ pi^{k-1} exp(alpha Q_{k-1}) unrolled from the
// uniform policy.
class PowerAgent {
 public:
  PowerAgent(FeatureMap features, AgentConfig cfg, int horizon);

  const AgentConfig& config() const { return cfg_; }
  int horizon() const { return horizon_; }
  int num_states() const { return features_.num_states(); }
  int num_actions() const { return features_.num_actions(); }
  int episodes_completed() const { return completed_; }

  std::vector<double> policy_at(int h, int s) const;
  Policy current_policy() const;
  int act(int h, int s, Rng& rng) const;

  double cum_q(int h, int s, int a) const;
  const StageEstimator& estimator(int h) const;

  struct OptimisticValues {
    std::vector<double> q;  // [h][s][a], clipped to [0, H-h]
    std::vector<double> v;  // [h][s] for h = 0..H, with V_H = 0
  };

  // Backward recursion with the current estimators for episode k = completed + 1.
  OptimisticValues backup_optimistic_values(const RewardTable& rewards) const;

  // Consumes the finished episode: backward pass, per-stage regression updates
  // at the visited pairs, and the fold of Q_k into the cumulative logits.
  // Fills the learning fields of `record` (sigma_bar, bonus, Q/V snapshots).
  void learn(const std::vector<int>& states, const std::vector<int>& actions,
             const RewardTable& rewards, EpisodeRecord& record);

 private:
  std::size_t q_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states() + s) * num_actions() + a;
  }

  FeatureMap features_;
  AgentConfig cfg_;
  int horizon_;
  int completed_ = 0;
  std::vector<double> cum_q_;
  std::vector<StageEstimator> estimators_;
};

// Independent random streams of a single run.
struct RunStreams {
  Rng env;
  Rng agent;
  Rng adversary;

  static RunStreams from_seed(std::uint64_t seed);
};

// Plays episode k: the adversary fixes r^k from past episodes, the agent rolls
// out its policy against `env`, then r^k is revealed and the agent learns.
EpisodeRecord run_episode(PowerAgent& agent, const MixtureMdp& env, const Adversary& adversary,
                          VisitHistory& history, int k, RunStreams& streams, RewardTable* revealed);

}  // namespace lmix
