#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include <nlohmann/json.hpp>

#include "lmix/estimator.hpp"
#include "lmix/mixture_mdp.hpp"
#include "lmix/run_log.hpp"

// JSON documents for instances, reward schedules, estimator snapshots and
// per-episode run logs. Doubles are written in shortest round-trip form, so a
// save/load cycle reproduces every value bit for bit.

namespace lmix {

struct InstanceFile {
  MixtureMdp mdp;
  std::optional<RewardTable> rewards;  // optional fixed reward table
};

nlohmann::json instance_to_json(const MixtureMdp& mdp, const RewardTable* rewards = nullptr);
InstanceFile instance_from_json(const nlohmann::json& doc);

nlohmann::json reward_table_to_json(const RewardTable& table);
RewardTable reward_table_from_json(const nlohmann::json& doc, const std::string& field);

nlohmann::json schedule_to_json(const RewardSchedule& schedule);
RewardSchedule schedule_from_json(const nlohmann::json& doc);

nlohmann::json estimator_snapshot(const StageEstimator& estimator);

// One line of newline-delimited JSON per episode.
void append_run_log(std::ostream& out, const EpisodeRecord& record);

// File helpers; failures raise IoError naming the file, malformed content ConfigError.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
InstanceFile load_instance(const std::filesystem::path& path);
void save_instance(const std::filesystem::path& path, const MixtureMdp& mdp,
                   const RewardTable* rewards = nullptr);

}  // namespace lmix
