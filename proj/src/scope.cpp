#include "labloop/scope.hpp"

#include <cctype>
#include <optional>

#include "labloop/error.hpp"
#include "labloop/text.hpp"
#include "sections.hpp"

namespace labloop {

namespace {

constexpr std::string_view kStageRequest =
    "Afterward, you should propose {N} broad stages of research development pertinent to this project. "
    "For each stage, clearly define the objective or the indication of its completion.";

constexpr std::string_view kAnalogyGuidance =
    "Consider this process as analogous to writing Python code. In coding, the whole project is divided into "
    "several generic functions, where the testing of subsequent functions relies on the completion of previous "
    "ones. Similarly, we need to guide our apprentice, who has limited knowledge of reticular chemistry, in "
    "completing tasks sequentially, and ultimately mastering the standard practice in reticular chemistry.";

constexpr std::string_view kNotesIntro = "In addition, below are some additional notes regarding this research:";

constexpr std::string_view kClosing =
    "Should you have any questions or find any aspects of this prompt unclear, please include your inquiries in "
    "your response.";

constexpr std::string_view kQuoteFence = "\"\"";

struct StageHeader {
  int index;
  std::string title;
};

// "Stage 3: Activation" -> {3, "Activation"}.
std::optional<StageHeader> match_stage_header(std::string_view line) {
  std::string_view s = detail::strip_decoration(line);
  if (!starts_with_ci(s, "stage")) return std::nullopt;
  std::size_t i = 5;
  while (i < s.size() && s[i] == ' ') ++i;
  std::size_t digits_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == digits_start || i - digits_start > 4) return std::nullopt;
  int index = std::stoi(std::string(s.substr(digits_start, i - digits_start)));
  while (i < s.size() && (s[i] == '*' || s[i] == '_' || s[i] == ' ')) ++i;
  if (i >= s.size() || s[i] != ':') return std::nullopt;
  ++i;
  std::string title(trim(s.substr(i)));
  while (!title.empty() && (title.back() == '*' || title.back() == '_')) title.pop_back();
  return StageHeader{index, std::string(trim(title))};
}

struct StageDraft {
  StageHeader header;
  std::optional<std::string> objective;
  std::optional<std::string> completion;
};

}  // namespace

ScopeRequest scope_request_from_json(const json& j) {
  ScopeRequest r;
  r.role_preamble = j.value("role_preamble", std::string{});
  r.focus_instruction = j.value("focus_instruction", std::string{});
  r.practice_text = j.value("practice_text", std::string{});
  r.project_notes = j.value("project_notes", std::vector<std::string>{});
  r.stage_count_hint = j.value("stage_count_hint", 5);
  return r;
}

json to_json_value(const ScopeRequest& req) {
  return {{"role_preamble", req.role_preamble},
          {"focus_instruction", req.focus_instruction},
          {"practice_text", req.practice_text},
          {"project_notes", req.project_notes},
          {"stage_count_hint", req.stage_count_hint}};
}

std::string render_scope_prompt(const ScopeRequest& req) {
  if (trim(req.practice_text).empty()) throw Error(ErrorCode::EmptyGroundingText);
  if (req.stage_count_hint < 1) throw Error(ErrorCode::InvalidArgument, "stage_count_hint must be >= 1");

  std::string request(kStageRequest);
  request.replace(request.find("{N}"), 3, std::to_string(req.stage_count_hint));

  std::string out;
  out += trim(req.role_preamble);
  out += "\n\n";
  out += trim(req.focus_instruction);
  out += "\n\n";
  out += kQuoteFence;
  out += "\n\n";
  out += trim(req.practice_text);
  out += "\n\n";
  out += kQuoteFence;
  out += "\n\n";
  out += request;
  out += "\n\n";
  out += kAnalogyGuidance;
  out += "\n\n";
  if (!req.project_notes.empty()) {
    out += kNotesIntro;
    out += "\n\n";
    for (std::size_t i = 0; i < req.project_notes.size(); ++i) {
      out += std::to_string(i + 1) + ") " + std::string(trim(req.project_notes[i])) + "\n";
    }
    out += "\n";
  }
  out += kClosing;
  out += "\n";
  return out;
}

Blueprint parse_scope_output(std::string_view text) {
  std::vector<StageDraft> drafts;
  std::string* body = nullptr;
  for (std::string_view line : split_lines(text)) {
    if (auto header = match_stage_header(line)) {
      drafts.push_back(StageDraft{*header, std::nullopt, std::nullopt});
      body = nullptr;
      continue;
    }
    if (drafts.empty()) continue;
    auto& d = drafts.back();
    if (auto rest = detail::match_label(line, "Objective")) {
      d.objective = std::string(*rest);
      body = &*d.objective;
    } else if (auto rest2 = detail::match_label(line, "Completion Indicator")) {
      d.completion = std::string(*rest2);
      body = &*d.completion;
    } else if (body != nullptr) {
      *body += "\n";
      *body += line;
    }
  }
  if (drafts.empty()) throw Error(ErrorCode::MissingStageHeader, "no \"Stage N:\" header found");

  std::vector<StageSpec> stages;
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto& d = drafts[i];
    if (d.header.index != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::NonContiguousStages,
                  "expected stage " + std::to_string(i + 1) + ", found stage " + std::to_string(d.header.index));
    }
    if (!d.objective || trim(*d.objective).empty()) {
      throw Error(ErrorCode::MissingObjective, "stage " + std::to_string(d.header.index));
    }
    if (!d.completion || trim(*d.completion).empty()) {
      throw Error(ErrorCode::MissingCompletionIndicator, "stage " + std::to_string(d.header.index));
    }
    if (d.header.title.empty()) throw Error(ErrorCode::MissingStageHeader, "stage " + std::to_string(i + 1) + " has no title");
    stages.push_back(StageSpec{d.header.index, d.header.title, std::string(trim(*d.objective)),
                               std::string(trim(*d.completion))});
  }
  return Blueprint(std::move(stages));
}

}  // namespace labloop
