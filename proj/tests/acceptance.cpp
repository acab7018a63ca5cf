// Acceptance checks. Prints one PASS/FAIL line per criterion; `--criterion N`
// runs a single one. Exit status is nonzero when any selected criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lmix/errors.hpp"
#include "lmix/estimator.hpp"
#include "lmix/evaluation.hpp"
#include "lmix/experiment.hpp"
#include "lmix/instances.hpp"
#include "lmix/power_agent.hpp"
#include "oracles.hpp"

using namespace lmix;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

// Runs fn(i) for i in [0, n) over a small thread pool.
void parallel_for(int n, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), n));
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
}

bool check_model(const MixtureMdp& mdp, Rng& rng, int num_values) {
  if (!validate(mdp).ok()) return false;
  const int S = mdp.num_states();
  for (int trial = 0; trial < num_values; ++trial) {
    const auto v = oracle::random_unit_vector_values(S, rng);
    for (int h = 0; h < mdp.horizon(); ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < mdp.num_actions(); ++a) {
          const auto row = mdp.transition_row(h, s, a);
          double total = 0.0;
          for (double p : row) {
            if (p < -1e-9 || p > 1.0 + 1e-9) return false;
            total += p;
          }
          if (std::abs(total - 1.0) > 1e-9) return false;
          if (std::abs(mdp.expected_next_value(h, v, s, a) - oracle::enumerate_expectation(mdp, h, v, s, a)) > 1e-9)
            return false;
          if (std::abs(mdp.exact_variance(h, v, s, a) - oracle::enumerate_variance(mdp, h, v, s, a)) > 1e-9)
            return false;
        }
  }
  return true;
}

Verdict criterion_1() {
  const auto start = Clock::now();
  Rng rng(101);
  int checked = 0, failed = 0;
  for (int d : {4, 6})
    for (int H : {3, 5}) {
      HardInstanceParams params;
      params.dim = d;
      params.horizon = H;
      params.signs = random_signs(d, H, rng);
      const auto hard = build_hard_instance(params, 1);
      ++checked;
      failed += !check_model(hard.mdp, rng, 20);
    }
  Rng grid(202);
  for (int i = 0; i < 100; ++i) {
    const int S = 2 + static_cast<int>(grid() % 7);
    const int A = 1 + static_cast<int>(grid() % 8);
    const int d = 1 + static_cast<int>(grid() % 4);
    const int H = 1 + static_cast<int>(grid() % 5);
    const auto mdp = build_random_instance(1000 + i, S, A, d, H);
    ++checked;
    failed += !check_model(mdp, rng, 20);
  }
  const double elapsed = seconds_since(start);
  return {failed == 0 && elapsed < 10.0,
          std::to_string(checked) + " instances, " + std::to_string(failed) + " failing, " +
              fmt("%.2f s (limit 10 s)", elapsed)};
}

Verdict criterion_2() {
  // Scalar ridge: lambda = 1, unit feature and target, unit weight.
  EstimatorConfig scalar;
  double worst_scalar = 0.0;
  {
    StageEstimator est(scalar);
    Eigen::VectorXd e1(1);
    e1 << 1.0;
    for (int n = 1; n <= 1000; ++n) {
      est.rank1_update(e1, 1.0, e1, 1.0, 1.0);
      worst_scalar = std::max(worst_scalar, std::abs(est.theta_hat()(0) - n / (1.0 + n)));
    }
  }

  Rng rng(303);
  double worst_residual = 0.0;
  int width_failures = 0;
  for (int seq = 0; seq < 10000; ++seq) {
    EstimatorConfig cfg;
    cfg.dim = 1 + static_cast<int>(rng() % 6);
    cfg.horizon = 1 + static_cast<int>(rng() % 5);
    cfg.lambda = 0.01 + uniform01(rng);
    StageEstimator est(cfg);
    const double H = cfg.horizon;
    const double floor = H / std::sqrt(static_cast<double>(cfg.dim));
    const int length = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < length; ++i) {
      Eigen::VectorXd phi(cfg.dim), phi2(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) {
        phi(j) = H * (2.0 * uniform01(rng) - 1.0);
        phi2(j) = H * H * (2.0 * uniform01(rng) - 1.0);
      }
      const int k = 1 + i;
      const double before = est.confidence_width(k, phi);
      est.rank1_update(phi, H * uniform01(rng), phi2, H * H * uniform01(rng), floor * (1.0 + 4.0 * uniform01(rng)));
      if (phi.norm() > 0.0 && !(est.confidence_width(k, phi) < before)) ++width_failures;
      worst_residual = std::max(worst_residual, (est.gram_hat() * est.theta_hat() - est.resp_hat()).norm());
      worst_residual = std::max(worst_residual, (est.gram_tilde() * est.theta_tilde() - est.resp_tilde()).norm());
    }
  }
  return {worst_scalar <= 1e-10 && worst_residual <= 1e-8 && width_failures == 0,
          fmt("scalar ridge error %.3g (tol 1e-10), max residual %.3g (tol 1e-8) over 1e4 sequences, ",
              worst_scalar, worst_residual) +
              std::to_string(width_failures) + " width increases"};
}

struct CoverageRun {
  bool ellipsoid = true;
  bool variance = true;
  bool optimism = true;
};

// Shared by criteria 3 and 4: 200 POWER runs on one random instance.
std::vector<CoverageRun> coverage_runs(double& elapsed) {
  static std::vector<CoverageRun> cache;
  static double cached_elapsed = 0.0;
  if (!cache.empty()) {
    elapsed = cached_elapsed;
    return cache;
  }
  const auto start = Clock::now();
  const int S = 4, A = 3, d = 3, H = 3, K = 200, runs = 200;
  const auto mdp = build_random_instance(7, S, A, d, H);
  const auto adversary = Adversary::iid_uniform(H, S, A);
  AgentConfig cfg;
  cfg.variant = Variant::power_bernstein;
  cfg.estimator.dim = d;
  cfg.estimator.horizon = H;
  cfg.estimator.delta = 0.1;
  cfg.estimator.bound = mdp.bound();
  cfg.estimator.lambda = 1.0 / (mdp.bound() * mdp.bound());
  cfg.alpha = auto_learning_rate(A, H, K);

  std::vector<CoverageRun> results(runs);
  parallel_for(runs, [&](int i) {
    CoverageRun& out = results[i];
    PowerAgent agent(mdp.features(), cfg, H);
    VisitHistory history(H, S, A);
    auto streams = RunStreams::from_seed(static_cast<std::uint64_t>(i));
    for (int k = 1; k <= K; ++k) {
      for (int h = 0; h < H; ++h)
        if (agent.estimator(h).ellipsoid_distance(mdp.theta(h)) > beta_hat(cfg.estimator, k)) out.ellipsoid = false;
      RewardTable revealed;
      const auto record = run_episode(agent, mdp, adversary, history, k, streams, &revealed);
      for (int h = 0; h < H; ++h) {
        const std::span<const double> next(record.v.data() + static_cast<std::size_t>(h + 1) * S, S);
        const double exact = mdp.exact_variance(h, next, record.states[h], record.actions[h]);
        if (std::abs(record.estimated_variance[h] - exact) > record.bonus[h]) out.variance = false;
      }
      if (record.optimistic_value < policy_value(mdp, revealed, record.policy) - 1e-9) out.optimism = false;
    }
  });
  cached_elapsed = seconds_since(start);
  cache = results;
  elapsed = cached_elapsed;
  return cache;
}

Verdict criterion_3() {
  double elapsed = 0.0;
  const auto runs = coverage_runs(elapsed);
  double ellipsoid = 0.0, variance = 0.0;
  for (const auto& r : runs) {
    ellipsoid += r.ellipsoid;
    variance += r.variance;
  }
  ellipsoid /= runs.size();
  variance /= runs.size();
  return {ellipsoid >= 0.4 && variance >= 0.7 && elapsed < 300.0,
          fmt("theta in C_{k,h} for all (k,h) in %.3f of runs (need >= 0.4), variance bound in %.3f "
              "(need >= 0.7), %.1f s (limit 300 s)",
              ellipsoid, variance, elapsed)};
}

Verdict criterion_4() {
  double elapsed = 0.0;
  const auto runs = coverage_runs(elapsed);
  double optimistic = 0.0;
  for (const auto& r : runs) optimistic += r.optimism;
  optimistic /= runs.size();
  return {optimistic >= 0.4, fmt("optimism at every episode in %.3f of runs (need >= 0.4)", optimistic)};
}

Verdict criterion_5() {
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int A = 1 + static_cast<int>(rng() % 4);
    std::vector<double> q(A), prev(A);
    double total = 0.0;
    for (int a = 0; a < A; ++a) {
      q[a] = 3.0 * uniform01(rng);
      prev[a] = 0.01 + uniform01(rng);
      total += prev[a];
    }
    for (double& p : prev) p /= total;
    const double alpha = 0.01 + 3.0 * uniform01(rng);
    const auto ours = exponential_weights_step(prev, q, alpha);
    const auto ref = oracle::kl_regularized_argmin(q, prev, alpha);
    worst = std::max(worst, oracle::total_variation(ours, ref));
  }
  return {worst <= 1e-6, fmt("max total variation %.3g over 500 triples (tol 1e-6)", worst)};
}

Verdict criterion_6() {
  Rng rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto mdp = build_random_instance(6000 + trial, 3, 2, 2, 2);
    RewardSchedule schedule;
    std::vector<RewardTable> tables;
    for (int k = 0; k < 3; ++k) {
      tables.push_back(random_reward_table(2, 3, 2, rng));
      schedule.append(tables.back());
    }
    worst = std::max(worst, std::abs(hindsight_optimal_value(mdp, schedule).total -
                                     oracle::brute_force_hindsight(mdp, tables)));
  }
  return {worst <= 1e-9, fmt("max |DP - brute force| %.3g over 50 instances (tol 1e-9)", worst)};
}

Verdict criterion_7() {
  const auto start = Clock::now();
  const int K = 4000, seeds = 10;
  ExperimentConfig base;
  base.instance.kind = "hard";
  base.instance.dim = 4;
  base.instance.horizon = 3;
  base.instance.gap = default_gap(4, 3);  // delta / (2(d-1)) = delta / 6
  base.episodes = K;
  base.delta = 0.1;
  const Environment env = build_environment(base);
  const ExperimentConfig resolved = resolve_config(base, env.mdp);

  const std::vector<Variant> variants{Variant::power_bernstein, Variant::hoeffding_unit_weight,
                                      Variant::uniform_policy};
  std::vector<std::vector<double>> regret(variants.size() * seeds);
  // Diagnostic only: largest spread of the optimistic Q across actions at the
  // initial state in the final episode of any POWER run.
  std::vector<double> q_spread(seeds, 0.0);
  const int A = env.mdp.num_actions();
  parallel_for(static_cast<int>(regret.size()), [&](int i) {
    const Variant variant = variants[i / seeds];
    const auto outcome = run_single(env.mdp, env.adversary, agent_config(resolved, env.mdp, variant), K,
                                    static_cast<std::uint64_t>(i % seeds));
    regret[i] = outcome.series.cum_regret;
    if (variant == Variant::power_bernstein) {
      const auto& q = outcome.log.back().q;
      const int s1 = env.mdp.initial_state();
      const auto first = q.begin() + static_cast<std::ptrdiff_t>(s1) * A;
      const auto [lo, hi] = std::minmax_element(first, first + A);
      q_spread[i % seeds] = *hi - *lo;
    }
  });
  auto mean_at = [&](std::size_t v, int k) {
    double m = 0.0;
    for (int s = 0; s < seeds; ++s) m += regret[v * seeds + s][k - 1];
    return m / seeds;
  };
  const double power = mean_at(0, K), hoeffding = mean_at(1, K), uniform = mean_at(2, K);
  const double power_growth = power / mean_at(0, K / 2);
  const double uniform_growth = uniform / mean_at(2, K / 2);
  const double elapsed = seconds_since(start);
  const bool a = power < 0.5 * uniform;
  const bool b = power_growth <= 1.8 && uniform_growth >= 1.95;
  const bool c = power <= 1.1 * hoeffding;
  std::string detail = std::string("(a) ") + (a ? "ok" : "fails") +
                       fmt(": power %.4g vs uniform %.4g; ", power, uniform) + "(b) " + (b ? "ok" : "fails") +
                       fmt(": growth power %.4f (need <= 1.8), uniform %.4f (need >= 1.95); ", power_growth,
                           uniform_growth) +
                       "(c) " + (c ? "ok" : "fails") + fmt(": hoeffding %.4g; ", hoeffding) +
                       fmt("final stage-1 Q spread %.3g; ", *std::max_element(q_spread.begin(), q_spread.end())) +
                       fmt("%.1f s (limit 600 s)", elapsed);
  return {a && b && c && elapsed < 600.0, detail};
}

Verdict criterion_8() {
  const auto root = std::filesystem::temp_directory_path() / "lmix_acceptance_determinism";
  std::filesystem::remove_all(root);
  auto run_into = [&](const std::string& name) {
    ExperimentConfig cfg;
    cfg.instance.kind = "random";
    cfg.instance.num_states = 4;
    cfg.instance.num_actions = 3;
    cfg.instance.dim = 3;
    cfg.instance.horizon = 3;
    cfg.instance.seed = 9;
    cfg.adversary.kind = AdversaryKind::adaptive;
    cfg.episodes = 300;
    cfg.variants = {Variant::power_bernstein, Variant::hoeffding_unit_weight, Variant::uniform_policy};
    cfg.seeds = {0, 1, 2, 3};
    cfg.output_dir = (root / name).string();
    return run_experiment(cfg);
  };
  const auto first = run_into("a");
  const auto second = run_into("b");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  int compared = 0, differing = 0;
  std::vector<std::string> files{"aggregate.csv"};
  for (const auto& run : first.runs) files.push_back(run.file);
  for (const auto& f : files) {
    ++compared;
    const auto x = slurp(root / "a" / f);
    if (x.empty() || x != slurp(root / "b" / f)) ++differing;
  }
  return {first.all_ok() && second.all_ok() && differing == 0,
          std::to_string(compared) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

const std::vector<std::pair<std::string, std::function<Verdict()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Verdict()>>> list{
      {"model validity", criterion_1},
      {"estimator correctness", criterion_2},
      {"confidence-set and variance coverage", criterion_3},
      {"optimism", criterion_4},
      {"mirror-descent closed form", criterion_5},
      {"hindsight oracle", criterion_6},
      {"regret trend", criterion_7},
      {"determinism", criterion_8},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  const auto& list = criteria();
  if (only < 0 || only > static_cast<int>(list.size())) {
    std::fprintf(stderr, "criterion must be in 1..%zu\n", list.size());
    return 2;
  }
  bool all = true;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Verdict v;
    try {
      v = list[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, list[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
