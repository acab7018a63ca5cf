#include "lmix/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "lmix/errors.hpp"
#include "lmix/serialization.hpp"

namespace lmix {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& doc, const std::string& key, const std::string& path, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "has the wrong type");
  }
}

std::optional<double> auto_or_number(const json& doc, const std::string& key) {
  if (!doc.contains(key)) return std::nullopt;
  const auto& v = doc.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    throw ConfigError(key, "expected a number or \"auto\"");
  }
  if (!v.is_number()) throw ConfigError(key, "expected a number or \"auto\"");
  return v.get<double>();
}

json auto_or_number_json(const std::optional<double>& v) {
  return v ? json(*v) : json("auto");
}

InstanceSpec parse_instance(const json& doc) {
  if (!doc.is_object()) throw ConfigError("instance", "expected an object");
  InstanceSpec spec;
  spec.kind = get_or<std::string>(doc, "kind", "instance.", "hard");
  if (spec.kind == "hard") {
    spec.dim = get_or<int>(doc, "dim", "instance.", 4);
    spec.horizon = get_or<int>(doc, "horizon", "instance.", 3);
    spec.gap = get_or<double>(doc, "gap", "instance.", 0.0);
    spec.seed = get_or<std::uint64_t>(doc, "sign_seed", "instance.", 0);
    spec.signs = get_or<std::vector<std::vector<int>>>(doc, "signs", "instance.", {});
  } else if (spec.kind == "random") {
    spec.num_states = get_or<int>(doc, "num_states", "instance.", 4);
    spec.num_actions = get_or<int>(doc, "num_actions", "instance.", 3);
    spec.dim = get_or<int>(doc, "dim", "instance.", 3);
    spec.horizon = get_or<int>(doc, "horizon", "instance.", 3);
    spec.seed = get_or<std::uint64_t>(doc, "seed", "instance.", 0);
    if (spec.num_states < 1 || spec.num_actions < 1 || spec.dim < 1 || spec.horizon < 1)
      throw ConfigError("instance", "counts must be positive");
  } else if (spec.kind == "file") {
    spec.path = get_or<std::string>(doc, "path", "instance.", "");
    if (spec.path.empty()) throw ConfigError("instance.path", "missing instance file path");
  } else {
    throw ConfigError("instance.kind", "expected hard, random or file");
  }
  return spec;
}

json instance_json(const InstanceSpec& spec) {
  json doc;
  doc["kind"] = spec.kind;
  if (spec.kind == "hard") {
    doc["dim"] = spec.dim;
    doc["horizon"] = spec.horizon;
    doc["gap"] = spec.gap;
    doc["sign_seed"] = spec.seed;
    if (!spec.signs.empty()) doc["signs"] = spec.signs;
  } else if (spec.kind == "random") {
    doc["num_states"] = spec.num_states;
    doc["num_actions"] = spec.num_actions;
    doc["dim"] = spec.dim;
    doc["horizon"] = spec.horizon;
    doc["seed"] = spec.seed;
  } else {
    doc["path"] = spec.path;
  }
  return doc;
}

std::string run_file_name(Variant variant, std::uint64_t seed) {
  return "runs/" + to_string(variant) + "_seed" + std::to_string(seed) + ".csv";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  ExperimentConfig cfg;
  if (doc.contains("instance")) cfg.instance = parse_instance(doc.at("instance"));
  cfg.episodes = get_or<int>(doc, "episodes", "", cfg.episodes);
  if (cfg.episodes < 1) throw ConfigError("episodes", "must be at least 1");

  if (doc.contains("adversary")) {
    const auto& adv = doc.at("adversary");
    if (!adv.is_object()) throw ConfigError("adversary", "expected an object");
    const auto kind = get_or<std::string>(adv, "kind", "adversary.", "fixed");
    cfg.adversary.kind = adversary_kind_from_string(kind);
    cfg.adversary.period = get_or<int>(adv, "period", "adversary.", 2);
    cfg.adversary.seed = get_or<std::uint64_t>(adv, "seed", "adversary.", 0);
    if (cfg.adversary.period < 1) throw ConfigError("adversary.period", "must be at least 1");
  }

  if (doc.contains("variants")) {
    const auto names = get_or<std::vector<std::string>>(doc, "variants", "", {});
    if (names.empty()) throw ConfigError("variants", "must not be empty");
    cfg.variants.clear();
    for (const auto& name : names) cfg.variants.push_back(variant_from_string(name));
  }

  cfg.lambda = auto_or_number(doc, "lambda");
  cfg.alpha = auto_or_number(doc, "alpha");
  cfg.bound = auto_or_number(doc, "bound");
  if (cfg.lambda && !(*cfg.lambda > 0.0)) throw ConfigError("lambda", "must be positive");
  if (cfg.alpha && !(*cfg.alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  if (cfg.bound && !(*cfg.bound >= 1.0)) throw ConfigError("bound", "must be at least 1");
  cfg.delta = get_or<double>(doc, "delta", "", cfg.delta);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("delta", "must lie in (0,1)");

  if (doc.contains("seeds")) cfg.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", "", {});
  if (cfg.seeds.empty()) throw ConfigError("seeds", "must not be empty");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
    throw ConfigError("seeds", "must be distinct");
  cfg.output_dir = get_or<std::string>(doc, "output_dir", "", cfg.output_dir);
  cfg.write_logs = get_or<bool>(doc, "write_logs", "", cfg.write_logs);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["instance"] = instance_json(cfg.instance);
  doc["episodes"] = cfg.episodes;
  doc["adversary"] = {{"kind", to_string(cfg.adversary.kind)},
                      {"period", cfg.adversary.period},
                      {"seed", cfg.adversary.seed}};
  json variants = json::array();
  for (auto v : cfg.variants) variants.push_back(to_string(v));
  doc["variants"] = variants;
  doc["lambda"] = auto_or_number_json(cfg.lambda);
  doc["alpha"] = auto_or_number_json(cfg.alpha);
  doc["bound"] = auto_or_number_json(cfg.bound);
  doc["delta"] = cfg.delta;
  doc["seeds"] = cfg.seeds;
  doc["output_dir"] = cfg.output_dir;
  doc["write_logs"] = cfg.write_logs;
  return doc;
}

Environment build_environment(const ExperimentConfig& cfg) {
  const auto& spec = cfg.instance;
  std::optional<MixtureMdp> mdp;
  std::optional<RewardTable> base;
  try {
    if (spec.kind == "hard") {
      HardInstanceParams params;
      params.dim = spec.dim;
      params.horizon = spec.horizon;
      params.gap = spec.gap;
      if (spec.dim >= 2 && spec.horizon >= 1) {
        Rng sign_rng(derive_seed(spec.seed, 0x51));
        params.signs = spec.signs.empty() ? random_signs(spec.dim, spec.horizon, sign_rng) : spec.signs;
      }
      auto built = build_hard_instance(params, 1);
      base = built.schedule.episode(1);
      mdp.emplace(std::move(built.mdp));
    } else if (spec.kind == "random") {
      mdp.emplace(build_random_instance(spec.seed, spec.num_states, spec.num_actions, spec.dim,
                                        spec.horizon));
    } else {
      auto file = load_instance(spec.path);
      base = std::move(file.rewards);
      mdp.emplace(std::move(file.mdp));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("instance", e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError("instance", e.what());
  }

  const auto report = validate(*mdp);
  if (!report.ok()) throw ConfigError("instance", "instance fails validation:\n" + report.to_string());

  const int H = mdp->horizon(), S = mdp->num_states(), A = mdp->num_actions();
  Rng table_rng(derive_seed(cfg.adversary.seed, 0xad));
  if (!base) base = random_reward_table(H, S, A, table_rng);

  switch (cfg.adversary.kind) {
    case AdversaryKind::fixed:
      return {std::move(*mdp), Adversary::fixed(*base)};
    case AdversaryKind::iid_uniform:
      return {std::move(*mdp), Adversary::iid_uniform(H, S, A)};
    case AdversaryKind::periodic: {
      std::vector<RewardTable> tables{*base};
      while (static_cast<int>(tables.size()) < cfg.adversary.period)
        tables.push_back(random_reward_table(H, S, A, table_rng));
      return {std::move(*mdp), Adversary::periodic(std::move(tables))};
    }
    case AdversaryKind::adaptive:
      return {std::move(*mdp), Adversary::adaptive(H, S, A)};
  }
  throw ConfigError("adversary.kind", "unknown adversary");
}

ExperimentConfig resolve_config(const ExperimentConfig& cfg, const MixtureMdp& mdp) {
  ExperimentConfig out = cfg;
  if (!out.bound) out.bound = mdp.bound();
  if (!out.lambda) out.lambda = 1.0 / (*out.bound * *out.bound);
  if (!out.alpha) {
    const double alpha = auto_learning_rate(mdp.num_actions(), mdp.horizon(), cfg.episodes);
    if (!(alpha > 0.0))
      throw ConfigError("alpha", "automatic learning rate is zero for a single action; set alpha");
    out.alpha = alpha;
  }
  return out;
}

AgentConfig agent_config(const ExperimentConfig& resolved, const MixtureMdp& mdp, Variant variant) {
  AgentConfig cfg;
  cfg.alpha = resolved.alpha.value();
  cfg.variant = variant;
  cfg.estimator.lambda = resolved.lambda.value();
  cfg.estimator.delta = resolved.delta;
  cfg.estimator.bound = resolved.bound.value();
  cfg.estimator.horizon = mdp.horizon();
  cfg.estimator.dim = mdp.dim();
  return cfg;
}

RunOutcome run_single(const MixtureMdp& mdp, const Adversary& adversary, const AgentConfig& cfg,
                      int episodes, std::uint64_t seed) {
  require(episodes >= 1, "run_single: need at least one episode");
  PowerAgent agent(mdp.features(), cfg, mdp.horizon());
  VisitHistory history(mdp.horizon(), mdp.num_states(), mdp.num_actions());
  RunStreams streams = RunStreams::from_seed(seed);
  RunOutcome out;
  out.log.reserve(episodes);
  for (int k = 1; k <= episodes; ++k) {
    RewardTable revealed;
    out.log.push_back(run_episode(agent, mdp, adversary, history, k, streams, &revealed));
    out.schedule.append(std::move(revealed));
  }
  out.series = accumulate_regret(mdp, out.schedule, out.log);
  return out;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string run_csv(const RegretSeries& series, Variant variant, std::uint64_t seed) {
  std::string out = std::string(kRunCsvHeader) + "\n";
  const auto K = series.cum_regret.size();
  const std::string name = to_string(variant);
  for (std::size_t i = 0; i < K; ++i) {
    const double share = series.hindsight_opt_total * static_cast<double>(i + 1) / K;
    out += std::to_string(i + 1) + "," + name + "," + std::to_string(seed) + "," +
           format_number(series.v_pi[i]) + "," + format_number(share) + "," +
           format_number(series.cum_regret[i]) + "\n";
  }
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i)
    out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

bool ExperimentResult::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunSummary& r) { return r.ok; });
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Environment env = build_environment(cfg);
  ExperimentResult result;
  result.resolved = resolve_config(cfg, env.mdp);
  const auto& resolved = result.resolved;

  const std::filesystem::path out_dir(resolved.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "runs", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "runs").string() + ": " + ec.message());

  for (auto seed : resolved.seeds)
    for (auto variant : resolved.variants) {
      RunSummary run;
      run.seed = seed;
      run.variant = variant;
      run.file = run_file_name(variant, seed);
      result.runs.push_back(std::move(run));
    }

  // Each worker owns the runs it claims; nothing mutable is shared between runs.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.runs.size(); i = next++) {
      RunSummary& run = result.runs[i];
      try {
        const AgentConfig agent = agent_config(resolved, env.mdp, run.variant);
        RunOutcome outcome = run_single(env.mdp, env.adversary, agent, resolved.episodes, run.seed);
        write_text_file(out_dir / run.file, run_csv(outcome.series, run.variant, run.seed));
        if (resolved.write_logs) {
          std::ostringstream log;
          for (const auto& record : outcome.log) append_run_log(log, record);
          auto log_path = out_dir / run.file;
          log_path.replace_extension(".ndjson");
          write_text_file(log_path, log.str());
        }
        run.cum_regret = std::move(outcome.series.cum_regret);
        run.ok = true;
      } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
      }
    }
  };
  const unsigned workers = std::max(
      1u, std::min<unsigned>(std::thread::hardware_concurrency(), result.runs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  // Aggregate over successful runs, per variant, in config order.
  std::string aggregate = std::string(kAggregateCsvHeader) + "\n";
  for (auto variant : resolved.variants) {
    std::vector<const RunSummary*> ok;
    for (const auto& run : result.runs)
      if (run.ok && run.variant == variant) ok.push_back(&run);
    if (ok.empty()) continue;
    for (int k = 0; k < resolved.episodes; ++k) {
      double mean = 0.0;
      for (const auto* run : ok) mean += run->cum_regret[k];
      mean /= ok.size();
      double ss = 0.0;
      for (const auto* run : ok) ss += (run->cum_regret[k] - mean) * (run->cum_regret[k] - mean);
      const double sd = ok.size() > 1 ? std::sqrt(ss / (ok.size() - 1)) : 0.0;
      aggregate += std::to_string(k + 1) + "," + to_string(variant) + "," +
                   std::to_string(ok.size()) + "," + format_number(mean) + "," +
                   format_number(sd) + "\n";
    }
  }
  write_text_file(out_dir / "aggregate.csv", aggregate);

  json manifest;
  manifest["tool"] = "lmix";
  manifest["version"] = kToolVersion;
  manifest["config"] = config_to_json(resolved);
  json runs = json::array();
  for (const auto& run : result.runs) {
    json entry{{"variant", to_string(run.variant)}, {"seed", run.seed}, {"file", run.file},
               {"status", run.ok ? "ok" : "failed"}};
    if (run.ok)
      entry["sha256"] = sha256_hex(read_file(out_dir / run.file));
    else
      entry["error"] = run.error;
    runs.push_back(entry);
  }
  manifest["runs"] = runs;
  manifest["aggregate"] = {{"file", "aggregate.csv"}, {"sha256", sha256_hex(aggregate)}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

void print_summary(const std::filesystem::path& out_dir, std::ostream& out) {
  const auto manifest_path = out_dir / "manifest.json";
  json manifest;
  try {
    manifest = read_json_file(manifest_path);
  } catch (const ConfigError&) {
    throw IoError("corrupt file " + manifest_path.string());
  }
  int episodes = 0;
  try {
    episodes = manifest.at("config").at("episodes").get<int>();
  } catch (const json::exception&) {
    throw IoError("corrupt file " + manifest_path.string() + ": missing config.episodes");
  }

  const auto aggregate_path = out_dir / "aggregate.csv";
  std::istringstream csv(read_file(aggregate_path));
  std::string line;
  if (!std::getline(csv, line) || line != kAggregateCsvHeader)
    throw IoError("corrupt file " + aggregate_path.string() + ": unexpected header");

  struct Row {
    int runs = 0;
    double mean = 0.0;
    double sd = 0.0;
  };
  std::vector<std::string> order;
  std::map<std::string, std::map<int, Row>> table;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 5) throw IoError("corrupt file " + aggregate_path.string() + ": bad row '" + line + "'");
    try {
      const int k = std::stoi(cells[0]);
      if (!table.count(cells[1])) order.push_back(cells[1]);
      table[cells[1]][k] = {std::stoi(cells[2]), std::stod(cells[3]), std::stod(cells[4])};
    } catch (const std::exception&) {
      throw IoError("corrupt file " + aggregate_path.string() + ": bad row '" + line + "'");
    }
  }

  out << std::left << std::setw(24) << "variant" << std::right << std::setw(6) << "runs"
      << std::setw(18) << "final_regret" << std::setw(14) << "sd" << std::setw(14)
      << "growth_ratio" << "\n";
  for (const auto& name : order) {
    const auto& rows = table[name];
    const auto last = rows.find(episodes);
    if (last == rows.end())
      throw IoError("corrupt file " + aggregate_path.string() + ": missing final episode for " + name);
    const auto half = rows.find(episodes / 2);
    double ratio = std::nan("");
    if (half != rows.end() && half->second.mean != 0.0) ratio = last->second.mean / half->second.mean;
    out << std::left << std::setw(24) << name << std::right << std::setw(6) << last->second.runs
        << std::setw(18) << format_number(last->second.mean) << std::setw(14)
        << format_number(last->second.sd) << std::setw(14) << format_number(ratio) << "\n";
  }
}

}  // namespace lmix
