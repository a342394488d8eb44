#include "labloop/model.hpp"

#include <algorithm>

#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/text.hpp"

namespace labloop {

Blueprint::Blueprint(std::vector<StageSpec> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw Error(ErrorCode::InvalidArgument, "blueprint needs at least one stage");
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    const auto& s = stages_[i];
    if (s.index != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::NonContiguousStages,
                  "stage at position " + std::to_string(i + 1) + " has index " + std::to_string(s.index));
    }
    if (trim(s.title).empty() || trim(s.objective).empty()) {
      throw Error(ErrorCode::InvalidArgument, "stage " + std::to_string(s.index) + " has an empty title or objective");
    }
  }
}

const StageSpec& Blueprint::stage(int index) const {
  if (index < 1 || index > size()) throw Error(ErrorCode::InvalidArgument, "no stage " + std::to_string(index));
  return stages_[static_cast<std::size_t>(index - 1)];
}

TaskChoice make_task_choice(int index, std::string text) {
  int n = count_sentences(text);
  return TaskChoice{index, std::move(text), n};
}

NavigatorOutput::NavigatorOutput(std::string summary, StageCursor cursor, std::string evaluation,
                                 std::vector<TaskChoice> choices)
    : summary_(std::move(summary)),
      cursor_(cursor),
      evaluation_(std::move(evaluation)),
      choices_(std::move(choices)),
      summary_sentences_(count_sentences(summary_)) {
  if (choices_.size() != 3) {
    throw Error(ErrorCode::InvalidArgument,
                "a navigator output has exactly 3 task choices, got " + std::to_string(choices_.size()));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (choices_[i].index != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::InvalidArgument, "task choice indices must be 1, 2, 3 in order");
    }
    if (trim(choices_[i].text).empty()) {
      throw Error(ErrorCode::InvalidArgument, "task choice " + std::to_string(i + 1) + " is empty");
    }
  }
  if (!is_valid(cursor_)) throw Error(ErrorCode::MalformedCursor, format_cursor(cursor_));
}

const TaskChoice& NavigatorOutput::choice(int index) const {
  if (index < 1 || index > 3) throw Error(ErrorCode::InvalidChoiceIndex, std::to_string(index));
  return choices_[static_cast<std::size_t>(index - 1)];
}

Feedback::Feedback(std::string text) : text_(std::move(text)), sentinel_(detect_sentinel(text_)) {}

std::string_view to_string(LintKind kind) {
  switch (kind) {
    case LintKind::SummaryTooLong: return "SummaryTooLong";
    case LintKind::TaskChoiceLengthOutOfRange: return "TaskChoiceLengthOutOfRange";
    case LintKind::CursorDivergence: return "CursorDivergence";
    case LintKind::NonContiguousSteps: return "NonContiguousSteps";
  }
  return "Unknown";
}

namespace {

LintKind lint_kind_from_string(std::string_view text) {
  for (auto k : {LintKind::SummaryTooLong, LintKind::TaskChoiceLengthOutOfRange, LintKind::CursorDivergence,
                 LintKind::NonContiguousSteps}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown lint kind " + std::string(text));
}

json optional_string(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_task_ref(const TaskRef& ref) {
  return ref.campaign_id + ":" + format_cursor(ref.cursor) + ":" + std::to_string(ref.choice);
}

RubricScore make_score(TaskRef ref, int relevance, int progress, int helpfulness) {
  for (int v : {relevance, progress, helpfulness}) {
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "rubric criteria are 0 or 1");
  }
  if (ref.choice < 1 || ref.choice > 3) throw Error(ErrorCode::InvalidChoiceIndex, std::to_string(ref.choice));
  return RubricScore{std::move(ref), relevance, progress, helpfulness};
}

std::string_view to_string(CampaignStatus status) {
  switch (status) {
    case CampaignStatus::Scoping: return "Scoping";
    case CampaignStatus::Active: return "Active";
    case CampaignStatus::Complete: return "Complete";
  }
  return "Unknown";
}

CampaignStatus campaign_status_from_string(std::string_view text) {
  for (auto s : {CampaignStatus::Scoping, CampaignStatus::Active, CampaignStatus::Complete}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown campaign status " + std::string(text));
}

const NavigatorTurn* Campaign::current_turn() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (!it->rejected) return &*it;
  }
  return nullptr;
}

NavigatorTurn* Campaign::current_turn() {
  return const_cast<NavigatorTurn*>(std::as_const(*this).current_turn());
}

std::vector<const NavigatorTurn*> Campaign::accepted_turns() const {
  std::vector<const NavigatorTurn*> out;
  for (const auto& t : turns) {
    if (!t.rejected) out.push_back(&t);
  }
  return out;
}

const NavigatorTurn* Campaign::find_turn(StageCursor c) const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (!it->rejected && it->cursor == c) return &*it;
  }
  return nullptr;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::CampaignCreated: return "CampaignCreated";
    case EventKind::BlueprintSet: return "BlueprintSet";
    case EventKind::PromptRendered: return "PromptRendered";
    case EventKind::ModelResponded: return "ModelResponded";
    case EventKind::TurnParsed: return "TurnParsed";
    case EventKind::TaskSelected: return "TaskSelected";
    case EventKind::FeedbackRecorded: return "FeedbackRecorded";
    case EventKind::CursorAdvanced: return "CursorAdvanced";
    case EventKind::ScoreRecorded: return "ScoreRecorded";
    case EventKind::CampaignCompleted: return "CampaignCompleted";
  }
  return "Unknown";
}

EventKind event_kind_from_string(std::string_view text) {
  for (auto k : {EventKind::CampaignCreated, EventKind::BlueprintSet, EventKind::PromptRendered,
                 EventKind::ModelResponded, EventKind::TurnParsed, EventKind::TaskSelected,
                 EventKind::FeedbackRecorded, EventKind::CursorAdvanced, EventKind::ScoreRecorded,
                 EventKind::CampaignCompleted}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown event kind " + std::string(text));
}

json to_json_value(const StageSpec& v) {
  return {{"index", v.index},
          {"title", v.title},
          {"objective", v.objective},
          {"completion_indicator", v.completion_indicator}};
}

json to_json_value(const Blueprint& v) {
  json stages = json::array();
  for (const auto& s : v.stages()) stages.push_back(to_json_value(s));
  return {{"stages", stages}};
}

json to_json_value(const TaskChoice& v) {
  return {{"index", v.index}, {"text", v.text}, {"sentence_count", v.sentence_count}};
}

json to_json_value(const NavigatorOutput& v) {
  json choices = json::array();
  for (const auto& c : v.choices()) choices.push_back(to_json_value(c));
  return {{"summary", v.summary()},
          {"summary_sentence_count", v.summary_sentence_count()},
          {"cursor", format_cursor(v.cursor())},
          {"evaluation", v.evaluation()},
          {"choices", choices}};
}

json to_json_value(const Feedback& v) { return {{"text", v.text()}, {"sentinel", v.sentinel()}}; }

json to_json_value(const Lint& v) {
  return {{"kind", std::string(to_string(v.kind))}, {"choice", v.choice}, {"detail", v.detail}};
}

json to_json_value(const std::vector<Lint>& v) {
  json out = json::array();
  for (const auto& l : v) out.push_back(to_json_value(l));
  return out;
}

json to_json_value(const ExecutorBrief& v) {
  return {{"consolidated_summary", v.consolidated_summary},
          {"steps", v.steps},
          {"report_template", v.report_template},
          {"slots", v.slots},
          {"lints", to_json_value(v.lints)}};
}

json to_json_value(const TaskRef& v) {
  return {{"campaign_id", v.campaign_id}, {"cursor", format_cursor(v.cursor)}, {"choice", v.choice}};
}

json to_json_value(const RubricScore& v) {
  return {{"task_ref", to_json_value(v.task_ref)},
          {"relevance", v.relevance},
          {"progress", v.progress},
          {"helpfulness", v.helpfulness},
          {"total", v.total()}};
}

json to_json_value(const NavigatorTurn& v) {
  return {{"cursor", format_cursor(v.cursor)},
          {"prompt", v.prompt},
          {"response", v.response},
          {"output", to_json_value(v.output)},
          {"lints", to_json_value(v.lints)},
          {"selected", v.selected ? json(*v.selected) : json(nullptr)},
          {"feedback", v.feedback ? to_json_value(*v.feedback) : json(nullptr)},
          {"brief_prompt", optional_string(v.brief_prompt)},
          {"brief_response", optional_string(v.brief_response)},
          {"brief", v.brief ? to_json_value(*v.brief) : json(nullptr)},
          {"brief_error", optional_string(v.brief_error)},
          {"rejected", v.rejected},
          {"advanced", v.advanced}};
}

json to_json_value(const Campaign& v) {
  json turns = json::array();
  for (const auto& t : v.turns) turns.push_back(to_json_value(t));
  json failed = json::array();
  for (const auto& f : v.failed_turns) {
    failed.push_back({{"cursor", format_cursor(f.cursor)},
                      {"prompt", f.prompt},
                      {"response", f.response},
                      {"error", f.error}});
  }
  json scores = json::array();
  for (const auto& s : v.scores) scores.push_back(to_json_value(s));
  json pending = nullptr;
  if (v.pending) {
    pending = {{"phase", v.pending->phase},
               {"prompt", v.pending->prompt},
               {"response", optional_string(v.pending->response)},
               {"choice", v.pending->choice}};
  }
  return {{"id", v.id},
          {"subject", v.subject},
          {"stage_count", v.stage_count},
          {"blueprint", v.blueprint ? to_json_value(*v.blueprint) : json(nullptr)},
          {"exemplar_subject", optional_string(v.exemplar_subject)},
          {"exemplar_summary", optional_string(v.exemplar_summary)},
          {"cursor", format_cursor(v.cursor)},
          {"rolling_summary", v.rolling_summary},
          {"status", std::string(to_string(v.status))},
          {"turns", turns},
          {"failed_turns", failed},
          {"scores", scores},
          {"pending", pending},
          {"scope_response", optional_string(v.scope_response)}};
}

json to_json_value(const Event& v) {
  return {{"seq", v.seq}, {"at", v.at}, {"kind", std::string(to_string(v.kind))}, {"payload", v.payload}};
}

Blueprint blueprint_from_json(const json& j) {
  std::vector<StageSpec> stages;
  for (const auto& s : j.at("stages")) {
    stages.push_back(StageSpec{s.at("index").get<int>(), s.at("title").get<std::string>(),
                               s.at("objective").get<std::string>(),
                               s.value("completion_indicator", std::string{})});
  }
  return Blueprint(std::move(stages));
}

NavigatorOutput navigator_output_from_json(const json& j) {
  std::vector<TaskChoice> choices;
  for (const auto& c : j.at("choices")) {
    choices.push_back(make_task_choice(c.at("index").get<int>(), c.at("text").get<std::string>()));
  }
  return NavigatorOutput(j.at("summary").get<std::string>(), parse_cursor(j.at("cursor").get<std::string>()),
                         j.at("evaluation").get<std::string>(), std::move(choices));
}

Feedback feedback_from_json(const json& j) { return Feedback(j.at("text").get<std::string>()); }

std::vector<Lint> lints_from_json(const json& j) {
  std::vector<Lint> out;
  for (const auto& l : j) {
    out.push_back(Lint{lint_kind_from_string(l.at("kind").get<std::string>()), l.value("choice", 0),
                       l.value("detail", std::string{})});
  }
  return out;
}

ExecutorBrief executor_brief_from_json(const json& j) {
  ExecutorBrief b;
  b.consolidated_summary = j.at("consolidated_summary").get<std::string>();
  b.steps = j.at("steps").get<std::vector<std::string>>();
  b.report_template = j.at("report_template").get<std::string>();
  b.slots = j.at("slots").get<std::vector<std::string>>();
  if (j.contains("lints")) b.lints = lints_from_json(j.at("lints"));
  return b;
}

TaskRef task_ref_from_json(const json& j) {
  return TaskRef{j.at("campaign_id").get<std::string>(), parse_cursor(j.at("cursor").get<std::string>()),
                 j.at("choice").get<int>()};
}

RubricScore rubric_score_from_json(const json& j) {
  return make_score(task_ref_from_json(j.at("task_ref")), j.at("relevance").get<int>(),
                    j.at("progress").get<int>(), j.at("helpfulness").get<int>());
}

Event event_from_json(const json& j) {
  Event e;
  e.seq = j.at("seq").get<std::int64_t>();
  e.at = j.value("at", std::string{});
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.payload = j.value("payload", json::object());
  return e;
}

}  // namespace labloop
