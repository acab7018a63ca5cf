#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmix/evaluation.hpp"
#include "lmix/instances.hpp"
#include "lmix/mixture_mdp.hpp"
#include "lmix/power_agent.hpp"

namespace lmix {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kRunCsvHeader = "episode,variant,seed,value_alg,value_opt_share,cum_regret";
inline constexpr const char* kAggregateCsvHeader =
    "episode,variant,num_runs,mean_cum_regret,sd_cum_regret";

struct InstanceSpec {
  std::string kind = "hard";  // hard | random | file
  int dim = 4;
  int horizon = 3;
  int num_states = 4;
  int num_actions = 3;
  double gap = 0.0;                     // hard only; <= 0 means default
  std::uint64_t seed = 0;               // random instance seed, or hard sign-pattern seed
  std::vector<std::vector<int>> signs;  // hard only; overrides the seed when present
  std::string path;                     // file only
};

struct AdversarySpec {
  AdversaryKind kind = AdversaryKind::fixed;
  int period = 2;
  std::uint64_t seed = 0;  // draws the fixed/periodic tables when the instance has none
};

struct ExperimentConfig {
  InstanceSpec instance;
  int episodes = 1000;
  AdversarySpec adversary;
  std::vector<Variant> variants = {Variant::power_bernstein};
  std::optional<double> lambda;  // nullopt = 1/B^2
  std::optional<double> alpha;   // nullopt = sqrt(log|A| / (H^2 K))
  double delta = 0.1;
  std::optional<double> bound;   // nullopt = the instance's B
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";
  bool write_logs = false;
};

// Parses the JSON config; every problem is reported as ConfigError with the
// dotted path of the field.
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Instance and adversary materialized from a config.
struct Environment {
  MixtureMdp mdp;
  Adversary adversary;
};

Environment build_environment(const ExperimentConfig& cfg);

// Fills the "auto" fields (lambda, alpha, bound) for the given environment.
ExperimentConfig resolve_config(const ExperimentConfig& cfg, const MixtureMdp& mdp);

AgentConfig agent_config(const ExperimentConfig& resolved, const MixtureMdp& mdp, Variant variant);

struct RunOutcome {
  RunLog log;
  RewardSchedule schedule;
  RegretSeries series;
};

// K episodes of one agent against one environment; all randomness comes from `seed`.
RunOutcome run_single(const MixtureMdp& mdp, const Adversary& adversary, const AgentConfig& cfg,
                      int episodes, std::uint64_t seed);

std::string run_csv(const RegretSeries& series, Variant variant, std::uint64_t seed);

struct RunSummary {
  Variant variant = Variant::power_bernstein;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string file;  // relative to the output directory
  std::vector<double> cum_regret;
};

struct ExperimentResult {
  ExperimentConfig resolved;
  std::vector<RunSummary> runs;
  bool all_ok() const;
};

// Runs every (seed, variant) pair in parallel and writes runs/*.csv,
// aggregate.csv and manifest.json into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Final cumulative regret (mean and sample sd over seeds) and the growth ratio
// cum_regret(K) / cum_regret(K/2) per variant, read back from `out_dir`.
void print_summary(const std::filesystem::path& out_dir, std::ostream& out);

std::string format_number(double x);
std::string sha256_hex(const std::string& bytes);

}  // namespace lmix
