#include <doctest.h>

#include <cmath>

#include "lmix/errors.hpp"
#include "lmix/instances.hpp"
#include "lmix/mixture_mdp.hpp"
#include "oracles.hpp"

using namespace lmix;

namespace {

HardInstanceParams hard_params(int d, int H) {
  HardInstanceParams p;
  p.dim = d;
  p.horizon = H;
  return p;
}

// One state pair with P = (0.5, 0.5) from state 0.
MixtureMdp coin_flip() {
  FeatureMap f(2, 1, 1);
  Eigen::VectorXd half(1);
  half << 0.5;
  for (int s = 0; s < 2; ++s)
    for (int next = 0; next < 2; ++next) f.set_feature(s, 0, next, half);
  Eigen::VectorXd one(1);
  one << 1.0;
  return MixtureMdp(f, {one}, 1.0, 0);
}

}  // namespace

TEST_CASE("transition_prob on the hard instance") {
  const auto p = hard_params(4, 3);
  const auto inst = build_hard_instance(p, 1);
  const double escape = 1.0 / 3.0;
  const double gap = escape / 6.0;
  const int goal = p.horizon + 1;
  const int best = hard_best_action(p, 0);
  CHECK(inst.mdp.transition_prob(0, 0, best, goal) == doctest::Approx(escape + 3 * gap).epsilon(1e-14));

  const int sink = p.horizon;
  for (int a = 0; a < p.num_actions(); ++a)
    for (int h = 0; h < p.horizon; ++h) {
      CHECK(inst.mdp.transition_prob(h, sink, a, sink) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(inst.mdp.transition_prob(h, goal, a, goal) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("rows of random instances sum to one") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mdp = build_random_instance(seed, 5, 3, 3, 4);
    for (int h = 0; h < mdp.horizon(); ++h)
      for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a) {
          double total = 0.0;
          for (int next = 0; next < mdp.num_states(); ++next) total += mdp.transition_prob(h, s, a, next);
          CHECK(std::abs(total - 1.0) <= 1e-9);
        }
  }
}

TEST_CASE("phi_v") {
  const auto mdp = build_random_instance(3, 4, 2, 3, 2);
  SUBCASE("zero value gives zero features") {
    const std::vector<double> zero(4, 0.0);
    CHECK(mdp.phi_v(zero).isZero(0.0));
  }
  SUBCASE("indicator of the rewarding state picks out its feature") {
    const auto p = hard_params(4, 3);
    const auto inst = build_hard_instance(p, 1);
    std::vector<double> v(inst.mdp.num_states(), 0.0);
    v[p.horizon + 1] = 1.0;
    for (int a = 0; a < p.num_actions(); ++a) {
      const Eigen::VectorXd f = inst.mdp.features().phi_v(0, a, v);
      const auto act = hard_action_vector(a, p.dim);
      CHECK(f(0) == doctest::Approx(p.alpha() * p.escape_prob()).epsilon(1e-15));
      for (int i = 0; i < p.dim - 1; ++i) CHECK(f(i + 1) == doctest::Approx(p.beta() * act[i]).epsilon(1e-15));
    }
  }
  SUBCASE("linear in v") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto v = oracle::random_unit_vector_values(4, rng);
      const auto w = oracle::random_unit_vector_values(4, rng);
      const double x = 2.0 * uniform01(rng) - 1.0, y = 3.0 * uniform01(rng) - 1.5;
      std::vector<double> mix(4);
      for (int i = 0; i < 4; ++i) mix[i] = x * v[i] + y * w[i];
      const Eigen::MatrixXd lhs = mdp.phi_v(mix);
      const Eigen::MatrixXd rhs = x * mdp.phi_v(v) + y * mdp.phi_v(w);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("length mismatch is a contract violation") {
    const std::vector<double> short_v(3, 0.0);
    CHECK_THROWS_AS(mdp.phi_v(short_v), ContractViolation);
  }
}

TEST_CASE("expected_next_value agrees with enumeration") {
  const auto mdp = build_random_instance(5, 6, 3, 4, 3);
  Rng rng(7);
  SUBCASE("constant value") {
    const std::vector<double> c(6, 0.375);
    for (int s = 0; s < 6; ++s) CHECK(mdp.expected_next_value(1, c, s, 2) == doctest::Approx(0.375).epsilon(1e-12));
  }
  SUBCASE("random values") {
    for (int trial = 0; trial < 100; ++trial) {
      const auto v = oracle::random_unit_vector_values(6, rng);
      for (int h = 0; h < 3; ++h)
        for (int s = 0; s < 6; ++s)
          for (int a = 0; a < 3; ++a)
            CHECK(std::abs(mdp.expected_next_value(h, v, s, a) -
                           oracle::enumerate_expectation(mdp, h, v, s, a)) <= 1e-9);
    }
  }
  SUBCASE("hard instance, best action, indicator of the rewarding state") {
    const auto p = hard_params(5, 4);
    const auto inst = build_hard_instance(p, 1);
    std::vector<double> v(inst.mdp.num_states(), 0.0);
    v[p.horizon + 1] = 1.0;
    const int best = hard_best_action(p, 2);
    const double expected = oracle::enumerate_expectation(inst.mdp, 2, v, 2, best);
    CHECK(expected == doctest::Approx(p.escape_prob() + (p.dim - 1) * p.resolved_gap()).epsilon(1e-14));
    CHECK(inst.mdp.expected_next_value(2, v, 2, best) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("exact_variance") {
  SUBCASE("constant has no variance") {
    const auto mdp = build_random_instance(1, 4, 2, 2, 2);
    const std::vector<double> c(4, 0.7);
    for (int s = 0; s < 4; ++s) CHECK(mdp.exact_variance(0, c, s, 1) == doctest::Approx(0.0));
    CHECK(mdp.exact_variance(0, c, 0, 0) >= 0.0);
  }
  SUBCASE("Bernoulli one half") {
    const auto mdp = coin_flip();
    const std::vector<double> v{0.0, 1.0};
    CHECK(mdp.exact_variance(0, v, 0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("random instance vs enumeration") {
    const auto mdp = build_random_instance(9, 5, 3, 3, 3);
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      auto v = oracle::random_unit_vector_values(5, rng);
      for (double& x : v) x *= 3.0;
      for (int h = 0; h < 3; ++h)
        for (int s = 0; s < 5; ++s)
          for (int a = 0; a < 3; ++a)
            CHECK(std::abs(mdp.exact_variance(h, v, s, a) - oracle::enumerate_variance(mdp, h, v, s, a)) <= 1e-9);
    }
  }
}

TEST_CASE("sample_transition") {
  SUBCASE("absorbing state stays put") {
    const auto p = hard_params(4, 3);
    const auto inst = build_hard_instance(p, 1);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(inst.mdp.sample_transition(1, p.horizon, i % p.num_actions(), rng) == p.horizon);
  }
  SUBCASE("deterministic row") {
    FeatureMap f(3, 1, 1);
    Eigen::VectorXd one(1);
    one << 1.0;
    for (int s = 0; s < 3; ++s) f.set_feature(s, 0, (s + 1) % 3, one);
    const MixtureMdp mdp(f, {one}, 1.0, 0);
    Rng rng(2);
    for (int i = 0; i < 500; ++i) CHECK(mdp.sample_transition(0, 1, 0, rng) == 2);
  }
  SUBCASE("empirical frequencies within three sigma") {
    const auto mdp = build_random_instance(21, 5, 2, 3, 2);
    Rng rng(2024);
    const int n = 100000;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) ++counts[mdp.sample_transition(1, 3, 1, rng)];
    for (int next = 0; next < 5; ++next) {
      const double p = mdp.transition_prob(1, 3, 1, next);
      const double sigma = std::sqrt(n * p * (1.0 - p));
      CHECK(std::abs(counts[next] - n * p) <= 3.0 * sigma + 1e-9);
    }
  }
  SUBCASE("identical seeds give identical trajectories") {
    const auto mdp = build_random_instance(4, 6, 3, 2, 5);
    Rng a(77), b(77);
    for (int run = 0; run < 50; ++run) {
      int sa = 0, sb = 0;
      for (int h = 0; h < 5; ++h) {
        sa = mdp.sample_transition(h, sa, h % 3, a);
        sb = mdp.sample_transition(h, sb, h % 3, b);
        CHECK(sa == sb);
      }
    }
  }
  SUBCASE("unnormalized row is a contract violation") {
    FeatureMap f(2, 1, 1);
    Eigen::VectorXd half(1);
    half << 0.5;
    f.set_feature(0, 0, 0, half);
    f.set_feature(0, 0, 1, half);
    Eigen::VectorXd two(1);
    two << 2.0;
    const MixtureMdp mdp(f, {two}, 2.0, 0);
    Rng rng(3);
    CHECK_THROWS_AS(mdp.sample_transition(0, 0, 0, rng), ContractViolation);
  }
}

TEST_CASE("validate") {
  SUBCASE("hard instance is valid") {
    const auto inst = build_hard_instance(hard_params(4, 3), 1);
    CHECK(validate(inst.mdp).ok());
  }
  SUBCASE("doubling theta breaks every row") {
    const auto mdp = build_random_instance(2, 3, 2, 2, 2);
    std::vector<Eigen::VectorXd> theta;
    for (int h = 0; h < 2; ++h) theta.push_back(2.0 * mdp.theta(h));
    const MixtureMdp broken(mdp.features(), theta, 10.0, 0);
    const auto report = validate(broken);
    int row_sums = 0;
    for (const auto& v : report.violations)
      if (v.constraint == "transition row does not sum to one") ++row_sums;
    CHECK(row_sums == 2 * 3 * 2);
  }
  SUBCASE("a perturbed feature entry is located") {
    const auto mdp = build_random_instance(8, 4, 3, 2, 2);
    FeatureMap f = mdp.features();
    Eigen::VectorXd e = f.feature(2, 1, 3);
    e(0) += 1e-3;
    f.set_feature(2, 1, 3, e);
    const MixtureMdp broken(f, {mdp.theta(0), mdp.theta(1)}, mdp.bound(), 0);
    const auto report = validate(broken);
    REQUIRE_FALSE(report.ok());
    int row_sums = 0;
    for (const auto& v : report.violations) {
      if (v.constraint != "transition row does not sum to one") continue;
      ++row_sums;
      CHECK(v.location.find("s=2 a=1") != std::string::npos);
    }
    CHECK(row_sums == 2);
  }
  SUBCASE("theta norm above the bound") {
    const auto mdp = build_random_instance(8, 4, 3, 2, 2);
    const MixtureMdp loose(mdp.features(), {mdp.theta(0), mdp.theta(1)}, 1.0, 0);
    bool flagged = false;
    for (const auto& v : validate(loose).violations) flagged |= v.constraint == "theta norm exceeds bound";
    CHECK(flagged == (mdp.theta(0).norm() > 1.0 || mdp.theta(1).norm() > 1.0));
  }
  SUBCASE("oversized features violate the phi_V bound") {
    FeatureMap f(2, 1, 1);
    Eigen::VectorXd big(1);
    big << 2.0;
    f.set_feature(0, 0, 0, big);
    f.set_feature(1, 0, 1, big);
    Eigen::VectorXd half(1);
    half << 0.5;
    const MixtureMdp mdp(f, {half}, 1.0, 0);
    bool flagged = false;
    for (const auto& v : validate(mdp).violations) flagged |= v.constraint == "feature norm ||phi_V|| exceeds one";
    CHECK(flagged);
  }
}

TEST_CASE("reward schedule") {
  RewardTable t(2, 2, 2, 0.5);
  CHECK(t.in_unit_interval());
  RewardSchedule schedule({t, t});
  CHECK(schedule.aggregated()(1, 1, 1) == doctest::Approx(1.0));
  RewardTable bad(2, 2, 2, 1.5);
  CHECK_THROWS_AS(schedule.append(bad), ContractViolation);
  CHECK_THROWS_AS(schedule.episode(3), ContractViolation);
}
