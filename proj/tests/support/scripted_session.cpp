#include "scripted_session.hpp"

#include <variant>

#include "labloop/error.hpp"
#include "labloop/rubric.hpp"
#include "labloop/scope.hpp"
#include "labloop/store.hpp"
#include "labloop/workflow.hpp"

namespace labloop::testing {

std::vector<std::string> scripted_campaign_responses(const Corpus& corpus, const std::string& key) {
  std::vector<std::string> responses{corpus.read("scope/output.txt")};
  const std::string brief = corpus.read("executor/output.txt");
  for (const auto& turn : corpus.campaign(key).turns) {
    responses.push_back(corpus.turn_text(turn));
    responses.push_back(brief);
  }
  return responses;
}

ScriptedRun run_scripted_campaign(const Corpus& corpus, const std::string& key, const std::string& data_dir,
                                  const std::string& scores_csv) {
  ScriptedProvider provider = ScriptedProvider::from_responses(scripted_campaign_responses(corpus, key));
  EventStore store(data_dir);
  Orchestrator orch(store, provider);

  const auto& campaign = corpus.campaign(key);
  NewCampaign spec;
  spec.subject = campaign.linker;
  spec.id = key;
  const std::string id = orch.create_campaign(spec).id;

  ScopeRequest request = scope_request_from_json(json::parse(corpus.read("scope/request.json")));
  orch.run_scope(id, request);

  for (const auto& turn : campaign.turns) {
    NavigatorTurn t = orch.run_turn(id);
    if (t.cursor != turn.cursor) {
      throw Error(ErrorCode::IllegalTransition, "scripted turn landed on " + format_cursor(t.cursor));
    }
    orch.select_task(id, 1);
    orch.run_brief(id);
    orch.record_feedback(id, corpus_feedback_text(turn));
  }

  if (!scores_csv.empty()) {
    for (const auto& s : import_scores_csv(scores_csv)) {
      orch.score_task(s.task_ref, s.relevance, s.progress, s.helpfulness);
    }
  }

  ScriptedRun run;
  run.campaign_id = id;
  run.live = store.snapshot(id);
  run.live_hash = state_hash(run.live);
  run.replay_hash = state_hash(store.replay(id));
  run.events = store.events(id).size();
  run.provider_calls = provider.position();
  return run;
}

}  // namespace labloop::testing
