#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "labloop/cursor.hpp"

namespace labloop {

using json = nlohmann::json;

struct StageSpec {
  int index = 0;
  std::string title;
  std::string objective;
  std::string completion_indicator;

  friend bool operator==(const StageSpec&, const StageSpec&) = default;
};

// Ordered K-stage plan. Indices are contiguous from 1 and titles/objectives
// are non-empty; the constructor rejects anything else.
class Blueprint {
 public:
  explicit Blueprint(std::vector<StageSpec> stages);

  const std::vector<StageSpec>& stages() const noexcept { return stages_; }
  int size() const noexcept { return static_cast<int>(stages_.size()); }
  const StageSpec& stage(int index) const;

  friend bool operator==(const Blueprint&, const Blueprint&) = default;

 private:
  std::vector<StageSpec> stages_;
};

struct TaskChoice {
  int index = 0;
  std::string text;
  int sentence_count = 0;

  friend bool operator==(const TaskChoice&, const TaskChoice&) = default;
};

TaskChoice make_task_choice(int index, std::string text);

// One parsed navigator response. Always carries exactly three choices
// indexed 1, 2, 3.
class NavigatorOutput {
 public:
  NavigatorOutput(std::string summary, StageCursor cursor, std::string evaluation,
                  std::vector<TaskChoice> choices);

  const std::string& summary() const noexcept { return summary_; }
  StageCursor cursor() const noexcept { return cursor_; }
  const std::string& evaluation() const noexcept { return evaluation_; }
  const std::vector<TaskChoice>& choices() const noexcept { return choices_; }
  const TaskChoice& choice(int index) const;
  int summary_sentence_count() const noexcept { return summary_sentences_; }

  friend bool operator==(const NavigatorOutput&, const NavigatorOutput&) = default;

 private:
  std::string summary_;
  StageCursor cursor_;
  std::string evaluation_;
  std::vector<TaskChoice> choices_;
  int summary_sentences_ = 0;
};

// Human feedback text; `sentinel()` is cached from detect_sentinel(text).
class Feedback {
 public:
  Feedback() = default;
  explicit Feedback(std::string text);

  const std::string& text() const noexcept { return text_; }
  bool sentinel() const noexcept { return sentinel_; }

  friend bool operator==(const Feedback&, const Feedback&) = default;

 private:
  std::string text_;
  bool sentinel_ = false;
};

enum class LintKind { SummaryTooLong, TaskChoiceLengthOutOfRange, CursorDivergence, NonContiguousSteps };

std::string_view to_string(LintKind kind);

struct Lint {
  LintKind kind = LintKind::SummaryTooLong;
  int choice = 0;  // 1..3 for per-choice lints, else 0
  std::string detail;

  friend bool operator==(const Lint&, const Lint&) = default;
};

struct ExecutorBrief {
  std::string consolidated_summary;
  std::vector<std::string> steps;
  std::string report_template;
  std::vector<std::string> slots;
  std::vector<Lint> lints;

  friend bool operator==(const ExecutorBrief&, const ExecutorBrief&) = default;
};

struct TaskRef {
  std::string campaign_id;
  StageCursor cursor;
  int choice = 1;

  friend bool operator==(const TaskRef&, const TaskRef&) = default;
};

std::string format_task_ref(const TaskRef& ref);

struct RubricScore {
  TaskRef task_ref;
  int relevance = 0;
  int progress = 0;
  int helpfulness = 0;

  int total() const noexcept { return relevance + progress + helpfulness; }
  friend bool operator==(const RubricScore&, const RubricScore&) = default;
};

// Validates each criterion is 0 or 1.
RubricScore make_score(TaskRef ref, int relevance, int progress, int helpfulness);

struct NavigatorTurn {
  StageCursor cursor;  // authoritative, from the advance rule
  std::string prompt;
  std::string response;
  NavigatorOutput output;
  std::vector<Lint> lints;
  std::optional<int> selected;
  std::optional<Feedback> feedback;
  std::optional<std::string> brief_prompt;
  std::optional<std::string> brief_response;
  std::optional<ExecutorBrief> brief;
  std::optional<std::string> brief_error;
  bool rejected = false;
  bool advanced = false;

  friend bool operator==(const NavigatorTurn&, const NavigatorTurn&) = default;
};

struct FailedTurn {
  StageCursor cursor;
  std::string prompt;
  std::string response;
  std::string error;

  friend bool operator==(const FailedTurn&, const FailedTurn&) = default;
};

// A provider call whose prompt has been logged but whose outcome has not.
struct PendingCall {
  std::string phase;  // "scope" | "navigator" | "executor"
  std::string prompt;
  std::optional<std::string> response;
  int choice = 0;

  friend bool operator==(const PendingCall&, const PendingCall&) = default;
};

enum class CampaignStatus { Scoping, Active, Complete };

std::string_view to_string(CampaignStatus status);
CampaignStatus campaign_status_from_string(std::string_view text);

struct Campaign {
  std::string id;
  std::string subject;
  int stage_count = 5;
  std::optional<Blueprint> blueprint;
  std::optional<std::string> exemplar_subject;
  std::optional<std::string> exemplar_summary;
  StageCursor cursor;
  std::string rolling_summary;
  CampaignStatus status = CampaignStatus::Scoping;
  std::vector<NavigatorTurn> turns;
  std::vector<FailedTurn> failed_turns;
  std::vector<RubricScore> scores;
  std::optional<PendingCall> pending;
  std::optional<std::string> scope_response;

  // Latest turn that was not rejected, or nullptr.
  const NavigatorTurn* current_turn() const;
  NavigatorTurn* current_turn();
  // Turns the human acted on (not rejected), in order.
  std::vector<const NavigatorTurn*> accepted_turns() const;
  const NavigatorTurn* find_turn(StageCursor cursor) const;

  friend bool operator==(const Campaign&, const Campaign&) = default;
};

enum class EventKind {
  CampaignCreated,
  BlueprintSet,
  PromptRendered,
  ModelResponded,
  TurnParsed,
  TaskSelected,
  FeedbackRecorded,
  CursorAdvanced,
  ScoreRecorded,
  CampaignCompleted,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view text);

struct Event {
  std::int64_t seq = 0;
  std::string at;
  EventKind kind = EventKind::CampaignCreated;
  json payload;
};

// JSON forms. Field names mirror the C++ member names.
json to_json_value(const StageSpec& v);
json to_json_value(const Blueprint& v);
json to_json_value(const TaskChoice& v);
json to_json_value(const NavigatorOutput& v);
json to_json_value(const Feedback& v);
json to_json_value(const Lint& v);
json to_json_value(const std::vector<Lint>& v);
json to_json_value(const ExecutorBrief& v);
json to_json_value(const TaskRef& v);
json to_json_value(const RubricScore& v);
json to_json_value(const NavigatorTurn& v);
json to_json_value(const Campaign& v);
json to_json_value(const Event& v);

Blueprint blueprint_from_json(const json& j);
NavigatorOutput navigator_output_from_json(const json& j);
Feedback feedback_from_json(const json& j);
std::vector<Lint> lints_from_json(const json& j);
ExecutorBrief executor_brief_from_json(const json& j);
TaskRef task_ref_from_json(const json& j);
RubricScore rubric_score_from_json(const json& j);
Event event_from_json(const json& j);

}  // namespace labloop
