#include "labloop/executor.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/text.hpp"
#include "sections.hpp"

namespace labloop {

namespace {

struct Span {
  std::size_t begin;  // index of '['
  std::size_t end;    // one past the matching ']'
};

std::vector<Span> slot_spans(std::string_view text) {
  std::vector<Span> spans;
  int depth = 0;
  std::size_t open = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '[') {
      if (depth == 0) open = i;
      ++depth;
    } else if (text[i] == ']' && depth > 0) {
      if (--depth == 0) spans.push_back({open, i + 1});
    } else if (text[i] == '\n' && depth > 0) {
      // Slots never span lines; an unclosed '[' is plain text.
      depth = 0;
    }
  }
  return spans;
}

// "12. text" or "12) text" -> 12.
std::optional<int> step_number(std::string_view line) {
  std::string_view s = trim(line);
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 0 || i > 4 || i >= s.size()) return std::nullopt;
  if (s[i] != '.' && s[i] != ')') return std::nullopt;
  if (i + 1 < s.size() && s[i + 1] != ' ' && s[i + 1] != '\t') return std::nullopt;
  return std::stoi(std::string(s.substr(0, i)));
}

bool is_steps_header(std::string_view line) {
  return starts_with_ci(detail::strip_decoration(line), "step-by-step") ||
         starts_with_ci(detail::strip_decoration(line), "step by step");
}

bool is_template_header(std::string_view line) {
  return starts_with_ci(detail::strip_decoration(line), "template");
}

std::string join_lines(const std::vector<std::string_view>& lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out += "\n";
    out += lines[i];
  }
  return out;
}

}  // namespace

std::vector<StageSummary> stage_summaries_for(const Campaign& campaign) {
  std::vector<StageSummary> out;
  for (const NavigatorTurn* turn : campaign.accepted_turns()) {
    if (turn->cursor.stage >= campaign.cursor.stage) break;
    if (!out.empty() && out.back().first.stage == turn->cursor.stage) {
      out.back() = {turn->cursor, turn->output.summary()};
    } else {
      out.emplace_back(turn->cursor, turn->output.summary());
    }
  }
  return out;
}

std::string render_executor_prompt(const Campaign& campaign, const std::vector<StageSummary>& stage_summaries,
                                   const NavigatorOutput& current, int chosen, const PromptTemplate& tmpl) {
  if (!campaign.blueprint) throw Error(ErrorCode::MissingBlueprint, campaign.id);
  if (chosen < 1 || chosen > 3) throw Error(ErrorCode::InvalidChoiceIndex, std::to_string(chosen));

  std::string summaries;
  for (const auto& [cursor, summary] : stage_summaries) {
    summaries += "Stage and Iteration: " + format_cursor(cursor) + ", Output Summary: " + summary + ";\n\n";
  }
  return tmpl.render({
      {"linker name", campaign.subject},
      {"stage count", number_word(campaign.blueprint->size())},
      {"stage list", render_stage_list(*campaign.blueprint)},
      {"number", std::to_string(chosen)},
      {"stage summaries", summaries},
      {"iteration", format_cursor(current.cursor())},
      {"most recent summary", current.summary()},
      {"reasoning", current.evaluation()},
      {"task 1 content", current.choice(1).text},
      {"task 2 content", current.choice(2).text},
      {"task 3 content", current.choice(3).text},
  });
}

ExecutorBrief parse_executor_output(std::string_view text) {
  std::vector<std::string_view> lines = split_lines(text);
  auto steps_at = std::find_if(lines.begin(), lines.end(), is_steps_header);
  if (steps_at == lines.end()) throw Error(ErrorCode::MissingStepsSection, "no \"Step-by-step\" header");
  auto template_at = std::find_if(steps_at + 1, lines.end(), is_template_header);
  if (template_at == lines.end()) throw Error(ErrorCode::MissingTemplateSection, "no \"Template\" header");

  const auto steps_line = static_cast<std::size_t>(steps_at - lines.begin());
  const auto template_line = static_cast<std::size_t>(template_at - lines.begin());

  ExecutorBrief brief;
  std::string summary(trim(join_lines(lines, 0, steps_line)));
  if (auto rest = detail::match_label(summary, "Summary")) summary = std::string(trim(*rest));
  brief.consolidated_summary = std::move(summary);

  std::vector<int> numbers;
  for (std::size_t i = steps_line + 1; i < template_line; ++i) {
    std::string_view line = trim(lines[i]);
    if (line.empty()) continue;
    if (auto n = step_number(line)) {
      numbers.push_back(*n);
      brief.steps.emplace_back(line);
    } else if (!brief.steps.empty()) {
      brief.steps.back() += "\n";
      brief.steps.back() += line;
    }
  }
  if (brief.steps.empty()) throw Error(ErrorCode::MissingStepsSection, "no numbered steps");
  for (std::size_t i = 0; i < numbers.size(); ++i) {
    if (numbers[i] != static_cast<int>(i) + 1) {
      brief.lints.push_back({LintKind::NonContiguousSteps, 0,
                             "step " + std::to_string(i + 1) + " is numbered " + std::to_string(numbers[i])});
      break;
    }
  }

  brief.report_template = std::string(trim(join_lines(lines, template_line + 1, lines.size())));
  brief.slots = extract_slots(brief.report_template);
  return brief;
}

std::vector<std::string> extract_slots(std::string_view report_template) {
  std::vector<std::string> slots;
  for (const Span& s : slot_spans(report_template)) {
    slots.emplace_back(report_template.substr(s.begin + 1, s.end - s.begin - 2));
  }
  return slots;
}

InstantiatedReport instantiate_report(const ExecutorBrief& brief, const std::map<std::string, std::string>& values) {
  for (const auto& [name, value] : values) {
    if (std::find(brief.slots.begin(), brief.slots.end(), name) == brief.slots.end()) {
      throw Error(ErrorCode::UnknownSlotName, name);
    }
  }
  InstantiatedReport out;
  const std::string& tmpl = brief.report_template;
  std::size_t pos = 0;
  for (const Span& s : slot_spans(tmpl)) {
    out.text.append(tmpl, pos, s.begin - pos);
    std::string name = tmpl.substr(s.begin + 1, s.end - s.begin - 2);
    if (auto it = values.find(name); it != values.end()) {
      out.text += it->second;
    } else {
      out.text.append(tmpl, s.begin, s.end - s.begin);
      if (std::find(out.unfilled.begin(), out.unfilled.end(), name) == out.unfilled.end()) {
        out.unfilled.push_back(std::move(name));
      }
    }
    pos = s.end;
  }
  out.text.append(tmpl, pos, std::string::npos);
  return out;
}

}  // namespace labloop
