#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "labloop/model.hpp"
#include "labloop/prompt_template.hpp"

namespace labloop {

inline constexpr std::string_view kSentinelPhrase = "I'm ready to move to the next stage";
inline constexpr std::string_view kFirstTurnMarker = "(none \xE2\x80\x94 first iteration)";

inline constexpr int kSummarySentenceLimit = 30;
inline constexpr int kChoiceMinSentences = 10;
inline constexpr int kChoiceMaxSentences = 20;

// The four inputs fed into every navigator prompt. Empty fields (and a
// missing last cursor) render as kFirstTurnMarker.
struct NavigatorInput {
  std::string summary;
  std::optional<StageCursor> last_cursor;
  std::string latest_task;
  Feedback feedback;

  static NavigatorInput first_turn() { return {}; }
};

// Input for the next turn of `campaign`, derived from its last advanced turn.
NavigatorInput navigator_input_for(const Campaign& campaign);

// "1) Title." lines for each blueprint stage.
std::string render_stage_list(const Blueprint& blueprint);

// Throws Error{MissingBlueprint}.
std::string render_navigator_prompt(const Campaign& campaign, const NavigatorInput& input,
                                    const PromptTemplate& tmpl = default_navigator_template());

// Extracts "Output Summary", "Current Stage and Iteration", "Status
// Evaluation" and "Task Choice 1..3" in any order. Text before the first
// label is ignored. Throws MissingSection, DuplicateSection,
// PlaceholderSection or MalformedCursor.
NavigatorOutput parse_navigator_output(std::string_view text);

bool detect_sentinel(std::string_view feedback_text);

struct CampaignComplete {
  friend bool operator==(CampaignComplete, CampaignComplete) { return true; }
};

using AdvanceResult = std::variant<StageCursor, CampaignComplete>;

AdvanceResult advance_cursor(StageCursor cursor, const Feedback& feedback, int stage_count);

// Contract lints; none of them block the loop.
std::vector<Lint> lint_turn(const NavigatorOutput& output, std::optional<StageCursor> expected_cursor);

}  // namespace labloop
