#pragma once

#include <string>
#include <vector>

#include "labloop/corpus.hpp"
#include "labloop/model.hpp"
#include "labloop/provider.hpp"

namespace labloop::testing {

// Provider responses for a whole corpus campaign: the scope plan, then for
// every turn the navigator reply followed by the executor brief.
std::vector<std::string> scripted_campaign_responses(const Corpus& corpus, const std::string& key);

struct ScriptedRun {
  std::string campaign_id;
  Campaign live;
  std::string live_hash;
  std::string replay_hash;
  std::size_t events = 0;
  std::size_t provider_calls = 0;
};

// Drives one corpus campaign end to end through the orchestrator against a
// scripted provider: scope, every turn (choice 1, brief, canned feedback)
// until completion, then every score in `scores_csv` when non-empty.
ScriptedRun run_scripted_campaign(const Corpus& corpus, const std::string& key, const std::string& data_dir,
                                  const std::string& scores_csv = {});

}  // namespace labloop::testing
