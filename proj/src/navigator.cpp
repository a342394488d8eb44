#include "labloop/navigator.hpp"

#include <array>
#include <map>

#include "labloop/error.hpp"
#include "labloop/text.hpp"
#include "sections.hpp"

namespace labloop {

namespace {

constexpr std::array<std::string_view, 6> kSectionLabels = {
    "Output Summary", "Current Stage and Iteration", "Status Evaluation",
    "Task Choice 1",  "Task Choice 2",               "Task Choice 3",
};

std::string or_marker(const std::string& value) {
  return trim(value).empty() ? std::string(kFirstTurnMarker) : value;
}

std::string normalize_for_sentinel(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+2018 / U+2019 single quotation marks -> ASCII apostrophe.
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 || static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      s.push_back('\'');
      i += 2;
      continue;
    }
    s.push_back(text[i]);
  }
  s = collapse_whitespace(to_lower_ascii(s));
  while (!s.empty() && std::string_view(".!?,;:\"' ").find(s.back()) != std::string_view::npos) s.pop_back();
  return s;
}

}  // namespace

NavigatorInput navigator_input_for(const Campaign& campaign) {
  const NavigatorTurn* last = nullptr;
  for (const auto* t : campaign.accepted_turns()) {
    if (t->advanced) last = t;
  }
  if (last == nullptr || !last->selected || !last->feedback) return NavigatorInput::first_turn();
  return NavigatorInput{last->output.summary(), last->cursor, last->output.choice(*last->selected).text,
                        *last->feedback};
}

std::string render_stage_list(const Blueprint& blueprint) {
  std::string out;
  for (const auto& s : blueprint.stages()) {
    if (!out.empty()) out += "\n";
    std::string title(trim(s.title));
    out += std::to_string(s.index) + ") " + title;
    if (!title.empty() && title.back() != '.') out += ".";
  }
  return out;
}

std::string render_navigator_prompt(const Campaign& campaign, const NavigatorInput& input,
                                    const PromptTemplate& tmpl) {
  if (!campaign.blueprint) throw Error(ErrorCode::MissingBlueprint, campaign.id);
  std::string exemplar;
  if (campaign.exemplar_summary) {
    exemplar = default_exemplar_block_template().render({
        {"another linker name", campaign.exemplar_subject.value_or("another")},
        {"full summary example", std::string(trim(*campaign.exemplar_summary))},
    });
  }
  return tmpl.render({
      {"linker name", campaign.subject},
      {"stage count", number_word(campaign.blueprint->size())},
      {"stage list", render_stage_list(*campaign.blueprint)},
      {"exemplar block", exemplar},
      {"summary", or_marker(input.summary)},
      {"iteration", input.last_cursor ? format_cursor(*input.last_cursor) : std::string(kFirstTurnMarker)},
      {"last task", or_marker(input.latest_task)},
      {"human feedback", or_marker(input.feedback.text())},
  });
}

NavigatorOutput parse_navigator_output(std::string_view text) {
  std::map<std::string_view, std::string> sections;
  std::string* current = nullptr;
  for (std::string_view line : split_lines(text)) {
    bool labelled = false;
    for (std::string_view label : kSectionLabels) {
      if (auto rest = detail::match_label(line, label)) {
        if (sections.count(label)) throw Error(ErrorCode::DuplicateSection, std::string(label));
        current = &sections[label];
        *current = std::string(*rest);
        labelled = true;
        break;
      }
    }
    if (labelled || current == nullptr) continue;
    *current += "\n";
    *current += line;
  }
  for (std::string_view label : kSectionLabels) {
    auto it = sections.find(label);
    if (it == sections.end()) throw Error(ErrorCode::MissingSection, std::string(label));
    it->second = std::string(trim(it->second));
    if (detail::is_placeholder(it->second)) throw Error(ErrorCode::PlaceholderSection, std::string(label));
  }
  for (std::string_view label : kSectionLabels) {
    if (sections[label].empty() && label != "Output Summary" && label != "Status Evaluation") {
      throw Error(ErrorCode::MissingSection, std::string(label) + " is empty");
    }
  }
  StageCursor cursor = parse_cursor(sections["Current Stage and Iteration"]);
  std::vector<TaskChoice> choices;
  for (int i = 1; i <= 3; ++i) {
    choices.push_back(make_task_choice(i, sections[kSectionLabels[static_cast<std::size_t>(2 + i)]]));
  }
  return NavigatorOutput(sections["Output Summary"], cursor, sections["Status Evaluation"], std::move(choices));
}

bool detect_sentinel(std::string_view feedback_text) {
  static const std::string kNormalizedPhrase = normalize_for_sentinel(kSentinelPhrase);
  return normalize_for_sentinel(feedback_text).find(kNormalizedPhrase) != std::string::npos;
}

AdvanceResult advance_cursor(StageCursor cursor, const Feedback& feedback, int stage_count) {
  if (!is_valid(cursor) || cursor.stage > stage_count) {
    throw Error(ErrorCode::InvalidArgument,
                "cursor " + format_cursor(cursor) + " outside " + std::to_string(stage_count) + " stages");
  }
  if (!feedback.sentinel()) return StageCursor{cursor.stage, cursor.iteration + 1};
  if (cursor.stage == stage_count) return CampaignComplete{};
  return StageCursor{cursor.stage + 1, 1};
}

std::vector<Lint> lint_turn(const NavigatorOutput& output, std::optional<StageCursor> expected_cursor) {
  std::vector<Lint> lints;
  if (output.summary_sentence_count() > kSummarySentenceLimit) {
    lints.push_back({LintKind::SummaryTooLong, 0,
                     std::to_string(output.summary_sentence_count()) + " sentences > " +
                         std::to_string(kSummarySentenceLimit)});
  }
  for (const auto& c : output.choices()) {
    if (c.sentence_count < kChoiceMinSentences || c.sentence_count > kChoiceMaxSentences) {
      lints.push_back({LintKind::TaskChoiceLengthOutOfRange, c.index,
                       std::to_string(c.sentence_count) + " sentences outside [" +
                           std::to_string(kChoiceMinSentences) + "," + std::to_string(kChoiceMaxSentences) + "]"});
    }
  }
  if (expected_cursor && output.cursor() != *expected_cursor) {
    lints.push_back({LintKind::CursorDivergence, 0,
                     "model reported " + format_cursor(output.cursor()) + ", expected " +
                         format_cursor(*expected_cursor)});
  }
  return lints;
}

}  // namespace labloop
