#include "lmix/evaluation.hpp"

#include "lmix/errors.hpp"

namespace lmix {

namespace {

void check_shapes(const MixtureMdp& mdp, const RewardTable& rewards) {
  require(rewards.horizon() == mdp.horizon() && rewards.num_states() == mdp.num_states() &&
              rewards.num_actions() == mdp.num_actions(),
          "evaluation: reward table does not match the MDP");
}

// Q_h(s,a) = r_h(s,a) + [P_h V_{h+1}](s,a) with transitions read row by row.
std::vector<double> stage_q(const MixtureMdp& mdp, const RewardTable& rewards, int h,
                            const std::vector<double>& next) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  std::vector<double> q(static_cast<std::size_t>(S) * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const auto row = mdp.transition_row(h, s, a);
      double expect = 0.0;
      for (int next_state = 0; next_state < S; ++next_state) expect += row[next_state] * next[next_state];
      q[static_cast<std::size_t>(s) * A + a] = rewards(h, s, a) + expect;
    }
  return q;
}

}  // namespace

std::vector<double> policy_values(const MixtureMdp& mdp, const RewardTable& rewards,
                                  const Policy& policy) {
  check_shapes(mdp, rewards);
  require(policy.horizon() == mdp.horizon() && policy.num_states() == mdp.num_states() &&
              policy.num_actions() == mdp.num_actions(),
          "policy_value: policy does not match the MDP");
  policy.check();
  const int S = mdp.num_states(), A = mdp.num_actions();
  std::vector<double> v(S, 0.0);
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    const auto q = stage_q(mdp, rewards, h, v);
    for (int s = 0; s < S; ++s) {
      double value = 0.0;
      for (int a = 0; a < A; ++a) value += policy(h, s, a) * q[static_cast<std::size_t>(s) * A + a];
      v[s] = value;
    }
  }
  return v;
}

double policy_value(const MixtureMdp& mdp, const RewardTable& rewards, const Policy& policy) {
  return policy_values(mdp, rewards, policy)[mdp.initial_state()];
}

HindsightOptimum hindsight_optimal_value(const MixtureMdp& mdp, const RewardSchedule& schedule) {
  require(schedule.num_episodes() >= 1, "hindsight_optimal_value: empty schedule");
  const RewardTable total = schedule.aggregated();
  check_shapes(mdp, total);
  const int S = mdp.num_states(), A = mdp.num_actions();
  HindsightOptimum out{0.0, Policy(mdp.horizon(), S, A)};
  std::vector<double> v(S, 0.0);
  for (int h = mdp.horizon() - 1; h >= 0; --h) {
    const auto q = stage_q(mdp, total, h, v);
    for (int s = 0; s < S; ++s) {
      int best = 0;
      for (int a = 1; a < A; ++a)
        if (q[static_cast<std::size_t>(s) * A + a] > q[static_cast<std::size_t>(s) * A + best]) best = a;
      out.policy.set_deterministic(h, s, best);
      v[s] = q[static_cast<std::size_t>(s) * A + best];
    }
  }
  out.total = v[mdp.initial_state()];
  return out;
}

RegretSeries accumulate_regret(const MixtureMdp& mdp, const RewardSchedule& schedule,
                               std::span<const Policy> policies) {
  require(static_cast<int>(policies.size()) == schedule.num_episodes(),
          "accumulate_regret: run log and schedule lengths differ");
  const HindsightOptimum best = hindsight_optimal_value(mdp, schedule);
  RegretSeries series;
  series.hindsight_opt_total = best.total;
  const int K = schedule.num_episodes();
  double alg = 0.0, regret = 0.0;
  for (int k = 1; k <= K; ++k) {
    const RewardTable& r = schedule.episode(k);
    const double v_pi = policy_value(mdp, r, policies[k - 1]);
    const double v_opt = policy_value(mdp, r, best.policy);
    alg += v_pi;
    regret += v_opt - v_pi;
    series.v_pi.push_back(v_pi);
    series.v_opt.push_back(v_opt);
    series.cum_alg_value.push_back(alg);
    series.cum_regret.push_back(regret);
  }
  return series;
}

RegretSeries accumulate_regret(const MixtureMdp& mdp, const RewardSchedule& schedule,
                               const RunLog& log) {
  std::vector<Policy> policies;
  policies.reserve(log.size());
  for (const auto& record : log) policies.push_back(record.policy);
  return accumulate_regret(mdp, schedule, policies);
}

}  // namespace lmix
