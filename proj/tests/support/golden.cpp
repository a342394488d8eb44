#include "golden.hpp"

#include "fixtures.hpp"
#include "labloop/error.hpp"
#include "labloop/scope.hpp"
#include "labloop/store.hpp"
#include "labloop/workflow.hpp"
#include "scripted_session.hpp"

namespace labloop::testing {

namespace {

// Scripted replies in order, recording every prompt sent.
class CapturingProvider : public Provider {
 public:
  explicit CapturingProvider(std::vector<std::string> replies) : inner_(ScriptedProvider::from_responses(replies)) {}
  std::string chat(const std::string& prompt) override {
    prompts.push_back(prompt);
    return inner_.chat(prompt);
  }
  std::vector<std::string> prompts;

 private:
  ScriptedProvider inner_;
};

}  // namespace

std::vector<GoldenPrompt> render_golden_prompts(const Corpus& corpus) {
  TempDir dir;
  EventStore store(dir.str());
  const ScopeRequest request = scope_request_from_json(json::parse(corpus.read("scope/request.json")));
  std::vector<GoldenPrompt> out{{"scope.txt", render_scope_prompt(request)}};

  // H through its first stage change: turns 1-1..1-5 then 2-1 with its brief.
  const auto& h = corpus.campaign("H");
  CapturingProvider provider(scripted_campaign_responses(corpus, "H"));
  Orchestrator orch(store, provider);
  NewCampaign spec;
  spec.subject = h.linker;
  spec.id = "H";
  orch.create_campaign(spec);
  orch.run_scope("H", request);
  for (std::size_t i = 0; i < 6; ++i) {
    orch.run_turn("H");
    orch.select_task("H", 1);
    orch.run_brief("H");
    orch.record_feedback("H", corpus_feedback_text(h.turns[i]));
  }
  if (provider.prompts.at(0) != out.front().second) {
    throw Error(ErrorCode::IllegalTransition, "orchestrated scope prompt differs from the rendered one");
  }
  // Prompt 0 is scope; turn i sends its navigator prompt at 1+2i, executor at 2+2i.
  out.emplace_back("navigator_first_turn.txt", provider.prompts.at(1));
  out.emplace_back("executor_first_turn.txt", provider.prompts.at(2));
  out.emplace_back("navigator_second_turn.txt", provider.prompts.at(3));
  out.emplace_back("navigator_after_stage_change.txt", provider.prompts.at(11));
  out.emplace_back("executor_second_stage.txt", provider.prompts.at(12));

  // A later campaign opened with the first campaign's final summary.
  const auto& of = corpus.campaign("oF");
  CapturingProvider second({corpus.turn_text(of.turns.front())});
  Orchestrator orch2(store, second);
  NewCampaign ex;
  ex.subject = of.linker;
  ex.id = "oF";
  ex.exemplar_subject = spec.subject;
  ex.exemplar_summary = corpus.final_summary("H");
  orch2.create_campaign(ex);
  orch2.set_blueprint("oF", store.snapshot("H").blueprint.value());
  orch2.run_turn("oF");
  out.emplace_back("navigator_exemplar_first_turn.txt", second.prompts.at(0));
  return out;
}

}  // namespace labloop::testing
