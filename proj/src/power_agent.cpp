#include "lmix/power_agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lmix/errors.hpp"

namespace lmix {

std::string to_string(Variant variant) {
  switch (variant) {
    case Variant::power_bernstein: return "power-bernstein";
    case Variant::hoeffding_unit_weight: return "hoeffding-unit-weight";
    case Variant::uniform_policy: return "uniform-policy";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  if (name == "power-bernstein") return Variant::power_bernstein;
  if (name == "hoeffding-unit-weight") return Variant::hoeffding_unit_weight;
  if (name == "uniform-policy") return Variant::uniform_policy;
  throw ConfigError("variants", "unknown variant '" + name + "'");
}

void AgentConfig::check() const {
  require(alpha > 0.0 && std::isfinite(alpha), "AgentConfig: alpha must be positive");
  estimator.check();
}

double auto_learning_rate(int num_actions, int horizon, int episodes) {
  require(num_actions >= 1 && horizon >= 1 && episodes >= 1,
          "auto_learning_rate: counts must be positive");
  return std::sqrt(std::log(static_cast<double>(num_actions)) /
                   (static_cast<double>(horizon) * horizon * episodes));
}

std::vector<double> exponential_weights_step(std::span<const double> prev,
                                             std::span<const double> q, double alpha) {
  require(prev.size() == q.size() && !prev.empty(), "exponential_weights_step: size mismatch");
  std::vector<double> next(prev.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < prev.size(); ++a) {
    require(prev[a] > 0.0, "exponential_weights_step: previous policy must be positive");
    next[a] = std::log(prev[a]) + alpha * q[a];
    top = std::max(top, next[a]);
  }
  double total = 0.0;
  for (double& x : next) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : next) x /= total;
  return next;
}

PowerAgent::PowerAgent(FeatureMap features, AgentConfig cfg, int horizon)
    : features_(std::move(features)), cfg_(cfg), horizon_(horizon) {
  cfg_.check();
  require(horizon_ == cfg_.estimator.horizon, "PowerAgent: horizon disagrees with estimator");
  require(features_.dim() == cfg_.estimator.dim, "PowerAgent: dimension disagrees with estimator");
  cum_q_.assign(static_cast<std::size_t>(horizon_) * num_states() * num_actions(), 0.0);
  estimators_.assign(horizon_, StageEstimator(cfg_.estimator));
}

std::vector<double> PowerAgent::policy_at(int h, int s) const {
  require(h >= 0 && h < horizon_ && s >= 0 && s < num_states(), "policy_at: index out of range");
  const int A = num_actions();
  std::vector<double> p(A);
  double top = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < A; ++a) {
    p[a] = cfg_.alpha * cum_q_[q_index(h, s, a)];
    top = std::max(top, p[a]);
  }
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

Policy PowerAgent::current_policy() const {
  Policy policy(horizon_, num_states(), num_actions());
  for (int h = 0; h < horizon_; ++h)
    for (int s = 0; s < num_states(); ++s) {
      const auto p = policy_at(h, s);
      std::copy(p.begin(), p.end(), policy.row(h, s).begin());
    }
  return policy;
}

int PowerAgent::act(int h, int s, Rng& rng) const {
  const auto p = policy_at(h, s);
  return sample_index(p, rng);
}

double PowerAgent::cum_q(int h, int s, int a) const {
  require(h >= 0 && h < horizon_ && s >= 0 && s < num_states() && a >= 0 && a < num_actions(),
          "cum_q: index out of range");
  return cum_q_[q_index(h, s, a)];
}

const StageEstimator& PowerAgent::estimator(int h) const {
  require(h >= 0 && h < horizon_, "estimator: stage out of range");
  return estimators_[h];
}

PowerAgent::OptimisticValues PowerAgent::backup_optimistic_values(
    const RewardTable& rewards) const {
  const int H = horizon_, S = num_states(), A = num_actions();
  require(rewards.horizon() == H && rewards.num_states() == S && rewards.num_actions() == A,
          "backup: reward table has wrong shape");
  const int k = completed_ + 1;
  const Policy policy = current_policy();

  OptimisticValues out;
  out.q.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  out.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const std::span<const double> next(out.v.data() + static_cast<std::size_t>(h + 1) * S, S);
    const Eigen::MatrixXd phi = features_.phi_v(next);
    const auto& est = estimators_[h];
    const double cap = H - h;
    for (int s = 0; s < S; ++s) {
      double value = 0.0;
      for (int a = 0; a < A; ++a) {
        const Eigen::VectorXd f = phi.col(s * A + a);
        const double raw = rewards(h, s, a) + est.theta_hat().dot(f) + est.confidence_width(k, f);
        const double q = std::clamp(raw, 0.0, cap);
        out.q[q_index(h, s, a)] = q;
        value += policy(h, s, a) * q;
      }
      out.v[static_cast<std::size_t>(h) * S + s] = value;
    }
  }
  return out;
}

void PowerAgent::learn(const std::vector<int>& states, const std::vector<int>& actions,
                       const RewardTable& rewards, EpisodeRecord& record) {
  const int H = horizon_, S = num_states();
  require(static_cast<int>(states.size()) == H + 1 && static_cast<int>(actions.size()) == H,
          "learn: trajectory has wrong length");
  const int k = completed_ + 1;

  if (cfg_.variant == Variant::uniform_policy) {
    record.q.assign(static_cast<std::size_t>(H) * S * num_actions(), 0.0);
    record.v.assign(static_cast<std::size_t>(H + 1) * S, 0.0);
    record.optimistic_value = 0.0;
    ++completed_;
    return;
  }

  OptimisticValues values = backup_optimistic_values(rewards);
  record.sigma_bar.assign(H, 1.0);
  if (cfg_.variant == Variant::power_bernstein) {
    record.estimated_variance.assign(H, 0.0);
    record.bonus.assign(H, 0.0);
  }

  for (int h = H - 1; h >= 0; --h) {
    const std::span<const double> next(values.v.data() + static_cast<std::size_t>(h + 1) * S, S);
    std::vector<double> next_sq(next.begin(), next.end());
    for (double& x : next_sq) x *= x;
    const int s = states[h], a = actions[h];
    const Eigen::VectorXd phi = features_.phi_v(s, a, next);
    const double target = next[states[h + 1]];
    auto& est = estimators_[h];

    if (cfg_.variant == Variant::hoeffding_unit_weight) {
      est.unit_weight_update(phi, target);
      continue;
    }
    const Eigen::VectorXd phi_sq = features_.phi_v(s, a, next_sq);
    const double var = est.estimated_variance(phi, phi_sq);
    const double e = est.bonus(k, phi, phi_sq);
    const double sigma = est.sigma_bar(var, e);
    record.estimated_variance[h] = var;
    record.bonus[h] = e;
    record.sigma_bar[h] = sigma;
    est.rank1_update(phi, target, phi_sq, target * target, sigma);
  }

  for (std::size_t i = 0; i < cum_q_.size(); ++i) cum_q_[i] += values.q[i];
  record.optimistic_value = values.v[states[0]];
  record.q = std::move(values.q);
  record.v = std::move(values.v);
  ++completed_;
}

RunStreams RunStreams::from_seed(std::uint64_t seed) {
  return {Rng(derive_seed(seed, 1)), Rng(derive_seed(seed, 2)), Rng(derive_seed(seed, 3))};
}

EpisodeRecord run_episode(PowerAgent& agent, const MixtureMdp& env, const Adversary& adversary,
                          VisitHistory& history, int k, RunStreams& streams,
                          RewardTable* revealed) {
  require(k >= 1, "run_episode: k must be at least 1");
  require(k == agent.episodes_completed() + 1, "run_episode: episodes must be played in order");
  const int H = env.horizon();

  // Rewards are committed before the rollout and revealed after it.
  RewardTable rewards = adversary.next_reward(k, history, streams.adversary);
  require(rewards.in_unit_interval(), "run_episode: adversary produced a reward outside [0,1]");
  require(rewards.horizon() == H && rewards.num_states() == env.num_states() &&
              rewards.num_actions() == env.num_actions(),
          "run_episode: reward table has wrong shape");

  EpisodeRecord record;
  record.episode = k;
  record.policy = agent.current_policy();
  record.states.reserve(H + 1);
  record.actions.reserve(H);
  int s = env.initial_state();
  record.states.push_back(s);
  for (int h = 0; h < H; ++h) {
    const int a = agent.act(h, s, streams.agent);
    s = env.sample_transition(h, s, a, streams.env);
    record.actions.push_back(a);
    record.states.push_back(s);
  }

  agent.learn(record.states, record.actions, rewards, record);
  history.record(record.states, record.actions);
  if (revealed != nullptr) *revealed = std::move(rewards);
  return record;
}

}  // namespace lmix
