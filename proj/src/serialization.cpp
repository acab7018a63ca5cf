#include "lmix/serialization.hpp"

#include <fstream>
#include <sstream>

#include "lmix/errors.hpp"

namespace lmix {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& doc, const char* key, const std::string& path) {
  if (!doc.contains(key)) throw ConfigError(path + key, "missing field");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(path + key, e.what());
  }
}

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (int j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json instance_to_json(const MixtureMdp& mdp, const RewardTable* rewards) {
  json doc;
  doc["num_states"] = mdp.num_states();
  doc["num_actions"] = mdp.num_actions();
  doc["horizon"] = mdp.horizon();
  doc["dim"] = mdp.dim();
  doc["bound"] = mdp.bound();
  doc["initial_state"] = mdp.initial_state();
  doc["features"] = mdp.features().row_major();
  json theta = json::array();
  for (int h = 0; h < mdp.horizon(); ++h) theta.push_back(vector_to_json(mdp.theta(h)));
  doc["theta"] = theta;
  if (rewards != nullptr) doc["rewards"] = reward_table_to_json(*rewards);
  return doc;
}

InstanceFile instance_from_json(const json& doc) {
  const int S = field<int>(doc, "num_states", "");
  const int A = field<int>(doc, "num_actions", "");
  const int H = field<int>(doc, "horizon", "");
  const int d = field<int>(doc, "dim", "");
  const double bound = field<double>(doc, "bound", "");
  const int initial = field<int>(doc, "initial_state", "");
  if (S < 1 || A < 1 || H < 1 || d < 1) throw ConfigError("", "counts must be positive");
  if (initial < 0 || initial >= S) throw ConfigError("initial_state", "out of range");

  const auto features = field<std::vector<double>>(doc, "features", "");
  if (features.size() != static_cast<std::size_t>(S) * A * S * d)
    throw ConfigError("features", "expected S*A*S*d entries");
  const auto theta_rows = field<std::vector<std::vector<double>>>(doc, "theta", "");
  if (static_cast<int>(theta_rows.size()) != H) throw ConfigError("theta", "expected H vectors");
  std::vector<Eigen::VectorXd> theta;
  for (const auto& row : theta_rows) {
    if (static_cast<int>(row.size()) != d) throw ConfigError("theta", "expected d entries per stage");
    theta.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), d));
  }
  InstanceFile out{MixtureMdp(FeatureMap(S, A, d, features), std::move(theta), bound, initial),
                   std::nullopt};
  if (doc.contains("rewards")) {
    RewardTable r = reward_table_from_json(doc.at("rewards"), "rewards.");
    if (r.horizon() != H || r.num_states() != S || r.num_actions() != A)
      throw ConfigError("rewards", "shape does not match the instance");
    out.rewards = std::move(r);
  }
  return out;
}

json reward_table_to_json(const RewardTable& table) {
  json doc;
  doc["horizon"] = table.horizon();
  doc["num_states"] = table.num_states();
  doc["num_actions"] = table.num_actions();
  doc["values"] = std::vector<double>(table.values().begin(), table.values().end());
  return doc;
}

RewardTable reward_table_from_json(const json& doc, const std::string& path) {
  const int H = field<int>(doc, "horizon", path);
  const int S = field<int>(doc, "num_states", path);
  const int A = field<int>(doc, "num_actions", path);
  if (H < 1 || S < 1 || A < 1) throw ConfigError(path, "counts must be positive");
  const auto values = field<std::vector<double>>(doc, "values", path);
  RewardTable table(H, S, A);
  if (values.size() != table.values().size()) throw ConfigError(path + "values", "expected H*S*A entries");
  std::copy(values.begin(), values.end(), table.values().begin());
  if (!table.in_unit_interval()) throw ConfigError(path + "values", "rewards must lie in [0,1]");
  return table;
}

json schedule_to_json(const RewardSchedule& schedule) {
  json doc;
  doc["num_episodes"] = schedule.num_episodes();
  json tables = json::array();
  for (int k = 1; k <= schedule.num_episodes(); ++k) tables.push_back(reward_table_to_json(schedule.episode(k)));
  doc["episodes"] = tables;
  return doc;
}

RewardSchedule schedule_from_json(const json& doc) {
  if (!doc.contains("episodes") || !doc.at("episodes").is_array())
    throw ConfigError("episodes", "missing reward table list");
  RewardSchedule schedule;
  int i = 0;
  for (const auto& entry : doc.at("episodes")) {
    auto table = reward_table_from_json(entry, "episodes[" + std::to_string(i++) + "].");
    try {
      schedule.append(std::move(table));
    } catch (const ContractViolation& e) {
      throw ConfigError("episodes", e.what());
    }
  }
  if (doc.contains("num_episodes") && doc.at("num_episodes") != schedule.num_episodes())
    throw ConfigError("num_episodes", "does not match the number of tables");
  return schedule;
}

json estimator_snapshot(const StageEstimator& est) {
  json doc;
  doc["samples"] = est.samples();
  doc["gram_hat"] = matrix_to_json(est.gram_hat());
  doc["resp_hat"] = vector_to_json(est.resp_hat());
  doc["theta_hat"] = vector_to_json(est.theta_hat());
  doc["gram_tilde"] = matrix_to_json(est.gram_tilde());
  doc["resp_tilde"] = vector_to_json(est.resp_tilde());
  doc["theta_tilde"] = vector_to_json(est.theta_tilde());
  return doc;
}

void append_run_log(std::ostream& out, const EpisodeRecord& record) {
  json line;
  line["k"] = record.episode;
  line["states"] = record.states;
  line["actions"] = record.actions;
  line["sigma_bar"] = record.sigma_bar;
  line["v1"] = record.optimistic_value;
  out << line.dump() << '\n';
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

InstanceFile load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

void save_instance(const std::filesystem::path& path, const MixtureMdp& mdp,
                   const RewardTable* rewards) {
  write_text_file(path, instance_to_json(mdp, rewards).dump(2) + "\n");
}

}  // namespace lmix
