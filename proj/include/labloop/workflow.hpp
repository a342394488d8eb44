#pragma once

#include <mutex>
#include <optional>
#include <set>
#include <string>

#include "labloop/executor.hpp"
#include "labloop/model.hpp"
#include "labloop/navigator.hpp"
#include "labloop/prompt_template.hpp"
#include "labloop/provider.hpp"
#include "labloop/scope.hpp"
#include "labloop/store.hpp"

namespace labloop {

struct PhaseTemplates {
  PromptTemplate navigator = default_navigator_template();
  PromptTemplate executor = default_executor_template();
};

struct FeedbackOutcome {
  AdvanceResult next;
  Campaign campaign;
};

// Drives campaigns through the three phases. Every state change is an event
// appended to the store; the orchestrator itself holds no campaign state.
// At most one provider call is in flight per campaign (TurnInFlight).
class Orchestrator {
 public:
  Orchestrator(EventStore& store, Provider& provider, PhaseTemplates templates = {});

  Campaign create_campaign(const NewCampaign& spec);

  // Renders the scope prompt, calls the provider, parses the plan and sets
  // it as the blueprint. A parse failure leaves the raw response recorded
  // and the campaign in Scoping.
  Blueprint run_scope(const std::string& campaign_id, const ScopeRequest& request);

  // Installs a human-refined blueprint without a provider call.
  Campaign set_blueprint(const std::string& campaign_id, const Blueprint& blueprint);

  // One navigator round trip from the campaign's current memory. Exactly one
  // provider call. A parse failure is recorded as a failed turn and
  // rethrown; a provider failure records nothing past the rendered prompt.
  // Running again before a task is selected replaces the current turn.
  NavigatorTurn run_turn(const std::string& campaign_id);

  Campaign select_task(const std::string& campaign_id, int choice);

  // Executor brief for the selected task of the current turn.
  ExecutorBrief run_brief(const std::string& campaign_id);

  // Records feedback for the current turn, then moves the cursor or
  // completes the campaign.
  FeedbackOutcome record_feedback(const std::string& campaign_id, const std::string& text);

  // Throws UnknownTask, DuplicateScore.
  RubricScore score_task(const TaskRef& ref, int relevance, int progress, int helpfulness, bool overwrite = false);

  EventStore& store() noexcept { return store_; }
  bool in_flight(const std::string& campaign_id) const;

 private:
  class FlightGuard;

  EventStore& store_;
  Provider& provider_;
  PhaseTemplates templates_;
  mutable std::mutex flight_mu_;
  std::set<std::string> flights_;
};

}  // namespace labloop
