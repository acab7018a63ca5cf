#pragma once

#include <span>
#include <vector>

#include "lmix/mixture_mdp.hpp"
#include "lmix/policy.hpp"
#include "lmix/run_log.hpp"

// Exact dynamic-programming oracles. These read the true theta_h and therefore
// live on the simulator side only; nothing here feeds back into an agent.

namespace lmix {

// V^pi over all states at stage 0 for one reward table.
std::vector<double> policy_values(const MixtureMdp& mdp, const RewardTable& rewards,
                                  const Policy& policy);

// V^pi_{k,1}(s_1).
double policy_value(const MixtureMdp& mdp, const RewardTable& rewards, const Policy& policy);

struct HindsightOptimum {
  double total = 0.0;  // sup_pi sum_k V^pi_{k,1}(s_1)
  Policy policy;       // deterministic, ties to the lowest action index
};

// For a fixed policy the K-episode value is linear in the rewards, so the best
// fixed policy solves a single DP on the summed reward table.
HindsightOptimum hindsight_optimal_value(const MixtureMdp& mdp, const RewardSchedule& schedule);

struct RegretSeries {
  std::vector<double> v_pi;           // V^{pi^k}_{k,1}(s_1)
  std::vector<double> v_opt;          // V^{pi*}_{k,1}(s_1)
  std::vector<double> cum_alg_value;  // running sum of v_pi
  std::vector<double> cum_regret;     // running sum of v_opt - v_pi
  double hindsight_opt_total = 0.0;
};

// Regret against the single hindsight-optimal policy of the full schedule.
RegretSeries accumulate_regret(const MixtureMdp& mdp, const RewardSchedule& schedule,
                               std::span<const Policy> policies);
RegretSeries accumulate_regret(const MixtureMdp& mdp, const RewardSchedule& schedule,
                               const RunLog& log);

}  // namespace lmix
