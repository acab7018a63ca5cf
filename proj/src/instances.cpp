#include "lmix/instances.hpp"

#include <cmath>
#include <stdexcept>

#include "lmix/errors.hpp"

namespace lmix {

namespace {

constexpr int kMaxHardDim = 12;

std::vector<double> dirichlet_point(int n, Rng& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = -std::log1p(-uniform01(rng));
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace

double default_gap(int dim, int horizon) {
  if (dim < 2 || horizon < 1) throw std::invalid_argument("default_gap: need d >= 2, H >= 1");
  return (1.0 / horizon) / (2.0 * (dim - 1));
}

double HardInstanceParams::resolved_gap() const {
  return gap > 0.0 ? gap : default_gap(dim, horizon);
}

double HardInstanceParams::alpha() const {
  return std::sqrt(1.0 / (1.0 + (dim - 1) * resolved_gap()));
}

double HardInstanceParams::beta() const {
  const double g = resolved_gap();
  return std::sqrt(g / (1.0 + (dim - 1) * g));
}

std::vector<std::vector<int>> random_signs(int dim, int horizon, Rng& rng) {
  std::vector<std::vector<int>> signs(horizon, std::vector<int>(dim - 1));
  for (auto& stage : signs)
    for (int& x : stage) x = (rng() >> 63) ? 1 : -1;
  return signs;
}

std::vector<int> hard_action_vector(int action, int dim) {
  std::vector<int> v(dim - 1);
  for (int i = 0; i < dim - 1; ++i) v[i] = ((action >> i) & 1) ? 1 : -1;
  return v;
}

int hard_best_action(const HardInstanceParams& params, int h) {
  int action = 0;
  for (int i = 0; i < params.dim - 1; ++i) {
    const int sign = params.signs.empty() ? 1 : params.signs.at(h).at(i);
    if (sign > 0) action |= 1 << i;
  }
  return action;
}

RewardTable hard_reward_table(const HardInstanceParams& params) {
  const int H = params.horizon;
  const int S = H + 2;
  RewardTable table(H, S, params.num_actions());
  for (int h = 0; h < H; ++h)
    for (int a = 0; a < params.num_actions(); ++a) table(h, H + 1, a) = 1.0;
  return table;
}

HardInstance build_hard_instance(const HardInstanceParams& params, int num_episodes) {
  const int d = params.dim;
  const int H = params.horizon;
  if (d < 4) throw std::invalid_argument("hard instance: dimension must be at least 4");
  if (d > kMaxHardDim) throw std::invalid_argument("hard instance: dimension above 12");
  if (H < 3) throw std::invalid_argument("hard instance: horizon must be at least 3");
  if (num_episodes < 1) throw std::invalid_argument("hard instance: need at least one episode");
  const double gap = params.resolved_gap();
  const double escape = params.escape_prob();
  if (!(gap > 0.0)) throw std::invalid_argument("hard instance: gap must be positive");
  if ((d - 1) * gap > escape + 1e-15)
    throw std::invalid_argument("hard instance: (d-1) * gap exceeds 1/H");
  if (!params.signs.empty()) {
    if (static_cast<int>(params.signs.size()) != H)
      throw std::invalid_argument("hard instance: need one sign pattern per stage");
    for (const auto& stage : params.signs) {
      if (static_cast<int>(stage.size()) != d - 1)
        throw std::invalid_argument("hard instance: sign pattern must have d-1 entries");
      for (int x : stage)
        if (x != 1 && x != -1) throw std::invalid_argument("hard instance: signs must be +1 or -1");
    }
  }

  const int S = H + 2;
  const int A = params.num_actions();
  const int sink = H;
  const int goal = H + 1;
  const double alpha = params.alpha();
  const double beta = params.beta();

  FeatureMap features(S, A, d);
  for (int a = 0; a < A; ++a) {
    const auto act = hard_action_vector(a, d);
    for (int j = 0; j < H; ++j) {
      Eigen::VectorXd advance(d), escape_feature(d);
      advance(0) = alpha * (1.0 - escape);
      escape_feature(0) = alpha * escape;
      for (int i = 0; i < d - 1; ++i) {
        advance(i + 1) = -beta * act[i];
        escape_feature(i + 1) = beta * act[i];
      }
      features.set_feature(j, a, j + 1, advance);
      features.set_feature(j, a, goal, escape_feature);
    }
    Eigen::VectorXd stay = Eigen::VectorXd::Zero(d);
    stay(0) = alpha;
    features.set_feature(sink, a, sink, stay);
    features.set_feature(goal, a, goal, stay);
  }

  std::vector<Eigen::VectorXd> theta;
  theta.reserve(H);
  for (int h = 0; h < H; ++h) {
    Eigen::VectorXd t(d);
    t(0) = 1.0 / alpha;
    for (int i = 0; i < d - 1; ++i) {
      const int sign = params.signs.empty() ? 1 : params.signs[h][i];
      t(i + 1) = sign * gap / beta;
    }
    theta.push_back(std::move(t));
  }

  MixtureMdp mdp(std::move(features), std::move(theta), 2.0, 0);
  const RewardTable rewards = hard_reward_table(params);
  std::vector<RewardTable> tables(num_episodes, rewards);
  return {std::move(mdp), RewardSchedule(std::move(tables))};
}

MixtureMdp build_random_instance(std::uint64_t seed, int num_states, int num_actions, int dim,
                                 int horizon) {
  require(num_states >= 1 && num_actions >= 1 && dim >= 1 && horizon >= 1,
          "build_random_instance: counts must be positive");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));

  FeatureMap features(num_states, num_actions, dim);
  for (int j = 0; j < dim; ++j)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        const auto row = dirichlet_point(num_states, rng);
        for (int next = 0; next < num_states; ++next) {
          Eigen::VectorXd f = features.feature(s, a, next);
          f(j) = row[next] * scale;
          features.set_feature(s, a, next, f);
        }
      }

  std::vector<Eigen::VectorXd> theta;
  double max_norm = 0.0;
  for (int h = 0; h < horizon; ++h) {
    const auto w = dirichlet_point(dim, rng);
    Eigen::VectorXd t(dim);
    for (int j = 0; j < dim; ++j) t(j) = w[j] / scale;
    max_norm = std::max(max_norm, t.norm());
    theta.push_back(std::move(t));
  }
  const double bound = std::max(1.0, std::ceil(max_norm));
  return MixtureMdp(std::move(features), std::move(theta), bound, 0);
}

RewardTable random_reward_table(int horizon, int num_states, int num_actions, Rng& rng) {
  RewardTable table(horizon, num_states, num_actions);
  for (double& r : table.values()) r = uniform01(rng);
  return table;
}

VisitHistory::VisitHistory(int horizon, int num_states, int num_actions)
    : counts_(horizon, num_states, num_actions) {}

void VisitHistory::record(std::span<const int> states, std::span<const int> actions) {
  const int H = counts_.horizon();
  require(static_cast<int>(states.size()) >= H && static_cast<int>(actions.size()) >= H,
          "VisitHistory: trajectory shorter than the horizon");
  for (int h = 0; h < H; ++h) counts_(h, states[h], actions[h]) += 1.0;
  ++episodes_;
}

std::string to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::fixed: return "fixed";
    case AdversaryKind::iid_uniform: return "iid-uniform";
    case AdversaryKind::periodic: return "periodic";
    case AdversaryKind::adaptive: return "adaptive";
  }
  return "unknown";
}

AdversaryKind adversary_kind_from_string(const std::string& name) {
  if (name == "fixed") return AdversaryKind::fixed;
  if (name == "iid-uniform") return AdversaryKind::iid_uniform;
  if (name == "periodic") return AdversaryKind::periodic;
  if (name == "adaptive") return AdversaryKind::adaptive;
  throw ConfigError("adversary.kind", "unknown adversary '" + name + "'");
}

Adversary::Adversary(AdversaryKind kind, int horizon, int num_states, int num_actions,
                     std::vector<RewardTable> tables)
    : kind_(kind),
      horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      tables_(std::move(tables)) {
  for (const auto& t : tables_) {
    require(t.in_unit_interval(), "Adversary: reward outside [0,1]");
    require(t.horizon() == horizon_ && t.num_states() == num_states_ &&
                t.num_actions() == num_actions_,
            "Adversary: reward tables differ in shape");
  }
}

Adversary Adversary::fixed(RewardTable table) {
  const int H = table.horizon(), S = table.num_states(), A = table.num_actions();
  return Adversary(AdversaryKind::fixed, H, S, A, {std::move(table)});
}

Adversary Adversary::iid_uniform(int horizon, int num_states, int num_actions) {
  return Adversary(AdversaryKind::iid_uniform, horizon, num_states, num_actions, {});
}

Adversary Adversary::periodic(std::vector<RewardTable> tables) {
  require(!tables.empty(), "Adversary::periodic: need at least one table");
  const int H = tables.front().horizon(), S = tables.front().num_states(),
            A = tables.front().num_actions();
  return Adversary(AdversaryKind::periodic, H, S, A, std::move(tables));
}

Adversary Adversary::adaptive(int horizon, int num_states, int num_actions) {
  return Adversary(AdversaryKind::adaptive, horizon, num_states, num_actions, {});
}

RewardTable Adversary::next_reward(int k, const VisitHistory& history, Rng& rng) const {
  require(k >= 1, "next_reward: episode index must be at least 1");
  switch (kind_) {
    case AdversaryKind::fixed:
      return tables_.front();
    case AdversaryKind::iid_uniform:
      return random_reward_table(horizon_, num_states_, num_actions_, rng);
    case AdversaryKind::periodic:
      return tables_[static_cast<std::size_t>(k - 1) % tables_.size()];
    case AdversaryKind::adaptive: {
      require(history.episodes() < k, "next_reward: history includes the current episode");
      RewardTable table(horizon_, num_states_, num_actions_, 1.0);
      if (history.episodes() == 0) return table;
      const double n = history.episodes();
      for (int h = 0; h < horizon_; ++h)
        for (int s = 0; s < num_states_; ++s)
          for (int a = 0; a < num_actions_; ++a)
            table(h, s, a) = std::clamp(1.0 - history.count(h, s, a) / n, 0.0, 1.0);
      return table;
    }
  }
  throw ContractViolation("next_reward: unknown adversary kind");
}

}  // namespace lmix
