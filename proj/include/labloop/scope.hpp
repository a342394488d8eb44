#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "labloop/model.hpp"

namespace labloop {

struct ScopeRequest {
  std::string role_preamble;
  std::string focus_instruction;
  std::string practice_text;  // grounding literature excerpt, quoted verbatim
  std::vector<std::string> project_notes;
  int stage_count_hint = 5;
};

ScopeRequest scope_request_from_json(const json& j);
json to_json_value(const ScopeRequest& req);

// Six parts in order: role, focus instruction, fenced grounding text, stage
// request, analogy guidance, numbered notes. Throws EmptyGroundingText.
std::string render_scope_prompt(const ScopeRequest& req);

// Reads "Stage N: <title>" headers and their "Objective:" and "Completion
// Indicator:" bodies. Headers are matched case-insensitively and may be
// wrapped in markdown bold or prefixed with '#'.
Blueprint parse_scope_output(std::string_view text);

}  // namespace labloop
