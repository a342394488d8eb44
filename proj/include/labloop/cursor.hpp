#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace labloop {

// The (stage, iteration) progress coordinate of a campaign, rendered "2-6".
// Both components are 1-based.
struct StageCursor {
  int stage = 1;
  int iteration = 1;

  friend auto operator<=>(const StageCursor&, const StageCursor&) = default;
};

struct CursorParseOptions {
  // Accept en-dash, em-dash, minus sign and Unicode hyphens as the separator.
  bool normalize_dashes = false;
};

std::string format_cursor(StageCursor cursor);

// Inverse of format_cursor after trimming surrounding whitespace.
// Throws Error{MalformedCursor}.
StageCursor parse_cursor(std::string_view text, CursorParseOptions options = {});

bool is_valid(StageCursor cursor) noexcept;

}  // namespace labloop
