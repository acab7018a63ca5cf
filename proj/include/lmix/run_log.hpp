#pragma once

#include <vector>

#include "lmix/policy.hpp"

namespace lmix {

// What one episode of an agent left behind. Stage-indexed vectors have H
// entries; `states` has H+1 (the final state included).
struct EpisodeRecord {
  int episode = 0;
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> sigma_bar;           // regression weight is 1/sigma_bar^2
  std::vector<double> estimated_variance;  // empty unless the Bernstein variant ran
  std::vector<double> bonus;               // E_{k,h}; same
  double optimistic_value = 0.0;           // V_k at stage 0, initial state
  Policy policy;                           // the policy played in this episode
  std::vector<double> q;                   // optimistic Q_k, [h][s][a]
  std::vector<double> v;                   // optimistic V_k, [h][s] for h = 0..H
};

using RunLog = std::vector<EpisodeRecord>;

}  // namespace lmix
