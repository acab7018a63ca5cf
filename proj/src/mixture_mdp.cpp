#include "lmix/mixture_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lmix/errors.hpp"

namespace lmix {

namespace {

std::string where(int h, int s, int a) {
  std::ostringstream out;
  out << "h=" << h << " s=" << s << " a=" << a;
  return out.str();
}

}  // namespace

FeatureMap::FeatureMap(int num_states, int num_actions, int dim)
    : num_states_(num_states), num_actions_(num_actions), dim_(dim) {
  require(num_states > 0 && num_actions > 0 && dim > 0,
          "FeatureMap: counts must be positive");
  blocks_.assign(static_cast<std::size_t>(num_states) * num_actions,
                 Eigen::MatrixXd::Zero(dim, num_states));
}

FeatureMap::FeatureMap(int num_states, int num_actions, int dim,
                       std::span<const double> row_major)
    : FeatureMap(num_states, num_actions, dim) {
  const std::size_t expected =
      static_cast<std::size_t>(num_states) * num_actions * num_states * dim;
  require(row_major.size() == expected, "FeatureMap: feature array has wrong length");
  std::size_t i = 0;
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) {
      auto& m = blocks_[static_cast<std::size_t>(s) * num_actions + a];
      for (int next = 0; next < num_states; ++next)
        for (int j = 0; j < dim; ++j) m(j, next) = row_major[i++];
    }
}

void FeatureMap::check_state_action(int s, int a) const {
  require(s >= 0 && s < num_states_, "state index out of range");
  require(a >= 0 && a < num_actions_, "action index out of range");
}

const Eigen::MatrixXd& FeatureMap::block(int s, int a) const {
  check_state_action(s, a);
  return blocks_[static_cast<std::size_t>(s) * num_actions_ + a];
}

Eigen::VectorXd FeatureMap::feature(int s, int a, int next_state) const {
  require(next_state >= 0 && next_state < num_states_, "next-state index out of range");
  return block(s, a).col(next_state);
}

void FeatureMap::set_feature(int s, int a, int next_state, const Eigen::VectorXd& value) {
  check_state_action(s, a);
  require(next_state >= 0 && next_state < num_states_, "next-state index out of range");
  require(value.size() == dim_, "feature has wrong dimension");
  blocks_[static_cast<std::size_t>(s) * num_actions_ + a].col(next_state) = value;
}

Eigen::VectorXd FeatureMap::phi_v(int s, int a, std::span<const double> v) const {
  require(static_cast<int>(v.size()) == num_states_, "phi_v: value vector has wrong length");
  const Eigen::Map<const Eigen::VectorXd> values(v.data(), num_states_);
  return block(s, a) * values;
}

Eigen::MatrixXd FeatureMap::phi_v(std::span<const double> v) const {
  require(static_cast<int>(v.size()) == num_states_, "phi_v: value vector has wrong length");
  const Eigen::Map<const Eigen::VectorXd> values(v.data(), num_states_);
  Eigen::MatrixXd out(dim_, num_states_ * num_actions_);
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a)
      out.col(s * num_actions_ + a).noalias() =
          blocks_[static_cast<std::size_t>(s) * num_actions_ + a] * values;
  return out;
}

std::vector<double> FeatureMap::row_major() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(num_states_) * num_actions_ * num_states_ * dim_);
  for (const auto& m : blocks_)
    for (int next = 0; next < num_states_; ++next)
      for (int j = 0; j < dim_; ++j) out.push_back(m(j, next));
  return out;
}

MixtureMdp::MixtureMdp(FeatureMap features, std::vector<Eigen::VectorXd> theta, double bound,
                       int initial_state)
    : features_(std::move(features)),
      theta_(std::move(theta)),
      bound_(bound),
      initial_state_(initial_state) {
  require(!theta_.empty(), "MixtureMdp: horizon must be positive");
  for (const auto& t : theta_)
    require(t.size() == features_.dim(), "MixtureMdp: theta has wrong dimension");
  require(initial_state_ >= 0 && initial_state_ < features_.num_states(),
          "MixtureMdp: initial state out of range");
}

void MixtureMdp::check_stage(int h) const {
  require(h >= 0 && h < horizon(), "stage index out of range");
}

const Eigen::VectorXd& MixtureMdp::theta(int h) const {
  check_stage(h);
  return theta_[h];
}

double MixtureMdp::transition_prob(int h, int s, int a, int next_state) const {
  check_stage(h);
  return features_.feature(s, a, next_state).dot(theta_[h]);
}

std::vector<double> MixtureMdp::transition_row(int h, int s, int a) const {
  check_stage(h);
  const Eigen::VectorXd row = features_.block(s, a).transpose() * theta_[h];
  return {row.data(), row.data() + row.size()};
}

double MixtureMdp::expected_next_value(int h, std::span<const double> v, int s, int a) const {
  check_stage(h);
  return features_.phi_v(s, a, v).dot(theta_[h]);
}

double MixtureMdp::exact_variance(int h, std::span<const double> v, int s, int a) const {
  std::vector<double> squared(v.begin(), v.end());
  for (double& x : squared) x *= x;
  const double mean = expected_next_value(h, v, s, a);
  const double second = expected_next_value(h, squared, s, a);
  const double var = second - mean * mean;
  if (var < 0.0 && var > -1e-12) return 0.0;
  return var;
}

int MixtureMdp::sample_transition(int h, int s, int a, Rng& rng) const {
  std::vector<double> row = transition_row(h, s, a);
  double total = 0.0;
  for (double& p : row) {
    require(p >= -kProbTolerance, "sample_transition: negative transition probability");
    p = std::max(p, 0.0);
    total += p;
  }
  require(std::abs(total - 1.0) <= kProbTolerance,
          "sample_transition: transition row does not sum to one at " + where(h, s, a));
  return sample_index(row, rng);
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations)
    out << v.constraint << " at " << v.location << " (value " << v.value << ")\n";
  return out.str();
}

ValidationReport validate(const MixtureMdp& mdp) {
  ValidationReport report;
  const int S = mdp.num_states();
  const int A = mdp.num_actions();
  const int H = mdp.horizon();

  if (!(mdp.bound() >= 1.0)) report.violations.push_back({"bound below one", "B", mdp.bound()});

  for (int h = 0; h < H; ++h) {
    const double norm = mdp.theta(h).norm();
    if (norm > mdp.bound() + 1e-12)
      report.violations.push_back({"theta norm exceeds bound", "h=" + std::to_string(h), norm});
  }

  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = mdp.transition_row(h, s, a);
        double total = 0.0;
        for (int next = 0; next < S; ++next) {
          const double p = row[next];
          total += p;
          if (p < -kProbTolerance || p > 1.0 + kProbTolerance)
            report.violations.push_back({"transition probability outside [0,1]",
                                         where(h, s, a) + " s'=" + std::to_string(next), p});
        }
        if (std::abs(total - 1.0) > kProbTolerance)
          report.violations.push_back({"transition row does not sum to one", where(h, s, a), total});
      }

  // Battery of V: S -> [0,1]. Random 0/1 vectors hit vertices of the cube, where
  // the convex map V -> ||phi_V|| attains its maximum.
  std::vector<std::vector<double>> battery;
  for (int i = 0; i < S; ++i) {
    std::vector<double> v(S, 0.0);
    v[i] = 1.0;
    battery.push_back(std::move(v));
  }
  battery.emplace_back(S, 1.0);
  Rng rng(0x5eed0f1e1dULL);
  for (int i = 0; i < 128; ++i) {
    std::vector<double> v(S);
    for (double& x : v) x = (i % 2 == 0) ? uniform01(rng) : (uniform01(rng) < 0.5 ? 0.0 : 1.0);
    battery.push_back(std::move(v));
  }
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double worst = 0.0;
      for (const auto& v : battery) worst = std::max(worst, mdp.features().phi_v(s, a, v).norm());
      if (worst > 1.0 + kProbTolerance)
        report.violations.push_back(
            {"feature norm ||phi_V|| exceeds one", "s=" + std::to_string(s) + " a=" + std::to_string(a),
             worst});
    }
  return report;
}

RewardTable::RewardTable(int horizon, int num_states, int num_actions, double fill)
    : horizon_(horizon), num_states_(num_states), num_actions_(num_actions) {
  require(horizon > 0 && num_states > 0 && num_actions > 0, "RewardTable: counts must be positive");
  data_.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, fill);
}

bool RewardTable::in_unit_interval() const {
  return std::all_of(data_.begin(), data_.end(), [](double r) { return r >= 0.0 && r <= 1.0; });
}

RewardSchedule::RewardSchedule(std::vector<RewardTable> tables) {
  for (auto& t : tables) append(std::move(t));
}

const RewardTable& RewardSchedule::episode(int k) const {
  require(k >= 1 && k <= num_episodes(), "RewardSchedule: episode out of range");
  return tables_[k - 1];
}

void RewardSchedule::append(RewardTable table) {
  require(table.in_unit_interval(), "RewardSchedule: reward outside [0,1]");
  if (!tables_.empty()) {
    const auto& first = tables_.front();
    require(table.horizon() == first.horizon() && table.num_states() == first.num_states() &&
                table.num_actions() == first.num_actions(),
            "RewardSchedule: table dimensions differ");
  }
  tables_.push_back(std::move(table));
}

RewardTable RewardSchedule::aggregated(int episodes) const {
  require(!tables_.empty(), "RewardSchedule: empty schedule");
  if (episodes < 0) episodes = num_episodes();
  require(episodes <= num_episodes(), "RewardSchedule: too many episodes requested");
  const auto& first = tables_.front();
  RewardTable total(first.horizon(), first.num_states(), first.num_actions());
  for (int k = 0; k < episodes; ++k) {
    auto src = tables_[k].values();
    auto dst = total.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  return total;
}

}  // namespace lmix
