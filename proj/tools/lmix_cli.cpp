// Command-line front end: run experiments, summarize them, check instance files.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "lmix/errors.hpp"
#include "lmix/experiment.hpp"
#include "lmix/serialization.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

int cmd_run(const std::string& config_path, const std::string& out_dir, int seed_count,
            const std::vector<std::string>& variants) {
  lmix::ExperimentConfig cfg = lmix::parse_config(lmix::read_json_file(config_path));
  if (cfg.instance.kind == "file") {
    // Instance paths in a config are relative to the config file.
    const std::filesystem::path instance(cfg.instance.path);
    if (instance.is_relative())
      cfg.instance.path = (std::filesystem::path(config_path).parent_path() / instance).string();
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed_count > 0) {
    cfg.seeds.clear();
    for (int i = 0; i < seed_count; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  if (!variants.empty()) {
    cfg.variants.clear();
    for (const auto& v : variants) cfg.variants.push_back(lmix::variant_from_string(v));
  }
  const auto result = lmix::run_experiment(cfg);
  for (const auto& run : result.runs)
    if (!run.ok)
      std::cerr << "run " << lmix::to_string(run.variant) << " seed " << run.seed
                << " failed: " << run.error << "\n";
  std::cout << "wrote " << result.runs.size() << " runs to " << result.resolved.output_dir << "\n";
  return result.all_ok() ? 0 : kExitRuntime;
}

int cmd_validate(const std::string& path) {
  const auto file = lmix::load_instance(path);
  const auto report = lmix::validate(file.mdp);
  if (report.ok()) {
    std::cout << "ok: S=" << file.mdp.num_states() << " A=" << file.mdp.num_actions()
              << " H=" << file.mdp.horizon() << " d=" << file.mdp.dim() << "\n";
    return 0;
  }
  std::cout << report.violations.size() << " violation(s)\n" << report.to_string();
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic policy optimization on linear mixture MDPs"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int seed_count = 0;
  std::vector<std::string> variants;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides the config)");
  run->add_option("--seed-count", seed_count, "Use seeds 0..N-1")->check(CLI::PositiveNumber);
  run->add_option("--variant", variants, "Agent variant (repeatable)");

  std::string summary_dir;
  auto* summary = app.add_subcommand("summary", "Print final regret per variant");
  summary->add_option("--out", summary_dir, "Experiment output directory")->required();

  std::string instance_path;
  auto* check = app.add_subcommand("validate-instance", "Check an instance file");
  check->add_option("--file", instance_path, "Instance JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, seed_count, variants);
    if (*summary) {
      lmix::print_summary(summary_dir, std::cout);
      return 0;
    }
    if (*check) return cmd_validate(instance_path);
  } catch (const lmix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lmix::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lmix::ContractViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
