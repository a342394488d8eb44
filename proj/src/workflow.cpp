#include "labloop/workflow.hpp"

#include "labloop/error.hpp"

namespace labloop {

class Orchestrator::FlightGuard {
 public:
  FlightGuard(Orchestrator& o, std::string id) : o_(o), id_(std::move(id)) {
    std::lock_guard lock(o_.flight_mu_);
    if (!o_.flights_.insert(id_).second) throw Error(ErrorCode::TurnInFlight, id_);
  }
  ~FlightGuard() {
    std::lock_guard lock(o_.flight_mu_);
    o_.flights_.erase(id_);
  }
  FlightGuard(const FlightGuard&) = delete;
  FlightGuard& operator=(const FlightGuard&) = delete;

 private:
  Orchestrator& o_;
  std::string id_;
};

Orchestrator::Orchestrator(EventStore& store, Provider& provider, PhaseTemplates templates)
    : store_(store), provider_(provider), templates_(std::move(templates)) {}

bool Orchestrator::in_flight(const std::string& campaign_id) const {
  std::lock_guard lock(flight_mu_);
  return flights_.count(campaign_id) > 0;
}

Campaign Orchestrator::create_campaign(const NewCampaign& spec) { return store_.create_campaign(spec); }

Blueprint Orchestrator::run_scope(const std::string& campaign_id, const ScopeRequest& request) {
  FlightGuard guard(*this, campaign_id);
  Campaign c = store_.snapshot(campaign_id);
  if (c.status != CampaignStatus::Scoping) throw Error(ErrorCode::IllegalTransition, "blueprint already set");
  ScopeRequest req = request;
  req.stage_count_hint = c.stage_count;
  const std::string prompt = render_scope_prompt(req);
  store_.append(campaign_id, EventKind::PromptRendered, {{"phase", "scope"}, {"prompt", prompt}});
  const std::string response = provider_.chat(prompt);
  store_.append(campaign_id, EventKind::ModelResponded, {{"phase", "scope"}, {"response", response}});
  Blueprint bp = parse_scope_output(response);
  store_.append(campaign_id, EventKind::BlueprintSet, {{"blueprint", to_json_value(bp)}});
  return bp;
}

Campaign Orchestrator::set_blueprint(const std::string& campaign_id, const Blueprint& blueprint) {
  store_.append(campaign_id, EventKind::BlueprintSet, {{"blueprint", to_json_value(blueprint)}});
  return store_.snapshot(campaign_id);
}

NavigatorTurn Orchestrator::run_turn(const std::string& campaign_id) {
  FlightGuard guard(*this, campaign_id);
  Campaign c = store_.snapshot(campaign_id);
  if (c.status != CampaignStatus::Active) {
    throw Error(ErrorCode::IllegalTransition, "campaign is " + std::string(to_string(c.status)));
  }
  const std::string prompt = render_navigator_prompt(c, navigator_input_for(c), templates_.navigator);
  store_.append(campaign_id, EventKind::PromptRendered,
                {{"phase", "navigator"}, {"prompt", prompt}, {"cursor", format_cursor(c.cursor)}});
  const std::string response = provider_.chat(prompt);
  store_.append(campaign_id, EventKind::ModelResponded, {{"phase", "navigator"}, {"response", response}});

  std::optional<NavigatorOutput> output;
  try {
    output = parse_navigator_output(response);
  } catch (const Error& e) {
    store_.append(campaign_id, EventKind::TurnParsed, {{"ok", false}, {"error", e.what()}});
    throw;
  }
  std::vector<Lint> lints = lint_turn(*output, c.cursor);
  store_.append(campaign_id, EventKind::TurnParsed,
                {{"ok", true},
                 {"cursor", format_cursor(c.cursor)},
                 {"output", to_json_value(*output)},
                 {"lints", to_json_value(lints)}});
  return *store_.snapshot(campaign_id).current_turn();
}

Campaign Orchestrator::select_task(const std::string& campaign_id, int choice) {
  if (choice < 1 || choice > 3) throw Error(ErrorCode::InvalidChoiceIndex, std::to_string(choice));
  Campaign c = store_.snapshot(campaign_id);
  const NavigatorTurn* t = c.current_turn();
  if (t == nullptr) throw Error(ErrorCode::IllegalTransition, "TaskSelected: no navigator turn yet");
  store_.append(campaign_id, EventKind::TaskSelected, {{"cursor", format_cursor(t->cursor)}, {"choice", choice}});
  return store_.snapshot(campaign_id);
}

ExecutorBrief Orchestrator::run_brief(const std::string& campaign_id) {
  FlightGuard guard(*this, campaign_id);
  Campaign c = store_.snapshot(campaign_id);
  const NavigatorTurn* t = c.current_turn();
  if (t == nullptr || !t->selected) throw Error(ErrorCode::IllegalTransition, "brief needs a selected task");
  const int choice = *t->selected;
  const std::string prompt =
      render_executor_prompt(c, stage_summaries_for(c), t->output, choice, templates_.executor);
  store_.append(campaign_id, EventKind::PromptRendered,
                {{"phase", "executor"}, {"prompt", prompt}, {"cursor", format_cursor(t->cursor)}, {"choice", choice}});
  const std::string response = provider_.chat(prompt);
  store_.append(campaign_id, EventKind::ModelResponded, {{"phase", "executor"}, {"response", response}});
  // The fold parses the brief; surface the same outcome to the caller.
  return parse_executor_output(response);
}

FeedbackOutcome Orchestrator::record_feedback(const std::string& campaign_id, const std::string& text) {
  Campaign c = store_.snapshot(campaign_id);
  const NavigatorTurn* t = c.current_turn();
  if (t == nullptr) throw Error(ErrorCode::IllegalTransition, "FeedbackRecorded: no navigator turn yet");
  const StageCursor from = c.cursor;
  Feedback feedback(text);
  if (t->feedback && !t->advanced) {
    // An earlier call stopped between the two appends; finish its move.
    if (t->feedback->text() != text) {
      throw Error(ErrorCode::IllegalTransition, "feedback already recorded for " + format_cursor(t->cursor));
    }
  } else {
    store_.append(campaign_id, EventKind::FeedbackRecorded, {{"cursor", format_cursor(t->cursor)}, {"text", text}});
  }
  AdvanceResult next = advance_cursor(from, feedback, c.stage_count);
  if (const auto* to = std::get_if<StageCursor>(&next)) {
    store_.append(campaign_id, EventKind::CursorAdvanced, {{"from", format_cursor(from)}, {"to", format_cursor(*to)}});
  } else {
    store_.append(campaign_id, EventKind::CampaignCompleted, {{"from", format_cursor(from)}});
  }
  return {next, store_.snapshot(campaign_id)};
}

RubricScore Orchestrator::score_task(const TaskRef& ref, int relevance, int progress, int helpfulness,
                                     bool overwrite) {
  RubricScore s = make_score(ref, relevance, progress, helpfulness);
  store_.append(ref.campaign_id, EventKind::ScoreRecorded, {{"score", to_json_value(s)}, {"overwrite", overwrite}});
  return s;
}

}  // namespace labloop
