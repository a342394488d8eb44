#pragma once

// Line-label matching shared by the phase output parsers.

#include <optional>
#include <string>
#include <string_view>

namespace labloop::detail {

// Strips leading markdown decoration ('#', '*', '_', '>' and spaces).
std::string_view strip_decoration(std::string_view line);

// If `line` starts with `label` (case-insensitive, optionally wrapped in
// markdown bold) followed by a colon or by nothing, returns the text after the
// label. "Task Choice 10:" does not match "Task Choice 1".
std::optional<std::string_view> match_label(std::string_view line, std::string_view label);

// True when the whole section body is a single "<...>" skeleton placeholder.
bool is_placeholder(std::string_view body);

}  // namespace labloop::detail
