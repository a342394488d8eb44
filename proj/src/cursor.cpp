#include "labloop/cursor.hpp"

#include <array>
#include <charconv>

#include "labloop/error.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

constexpr std::array<std::string_view, 6> kDashVariants = {
    "\xE2\x80\x90",  // hyphen
    "\xE2\x80\x91",  // non-breaking hyphen
    "\xE2\x80\x92",  // figure dash
    "\xE2\x80\x93",  // en dash
    "\xE2\x80\x94",  // em dash
    "\xE2\x88\x92",  // minus sign
};

std::string normalize_dashes(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    bool replaced = false;
    for (auto dash : kDashVariants) {
      if (text.substr(i, dash.size()) == dash) {
        out.push_back('-');
        i += dash.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(text[i++]);
  }
  return out;
}

int parse_component(std::string_view digits, std::string_view whole) {
  for (char c : digits) {
    if (c < '0' || c > '9') throw Error(ErrorCode::MalformedCursor, "\"" + std::string(whole) + "\"");
  }
  int value = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
    throw Error(ErrorCode::MalformedCursor, "\"" + std::string(whole) + "\"");
  }
  if (value <= 0) throw Error(ErrorCode::MalformedCursor, "\"" + std::string(whole) + "\" has a zero component");
  return value;
}

}  // namespace

std::string format_cursor(StageCursor cursor) {
  return std::to_string(cursor.stage) + "-" + std::to_string(cursor.iteration);
}

StageCursor parse_cursor(std::string_view text, CursorParseOptions options) {
  std::string buffer = options.normalize_dashes ? normalize_dashes(text) : std::string(text);
  std::string_view body = trim(buffer);
  auto hyphen = body.find('-');
  if (hyphen == std::string_view::npos || body.find('-', hyphen + 1) != std::string_view::npos) {
    throw Error(ErrorCode::MalformedCursor, "\"" + std::string(body) + "\"");
  }
  return StageCursor{parse_component(body.substr(0, hyphen), body),
                     parse_component(body.substr(hyphen + 1), body)};
}

bool is_valid(StageCursor cursor) noexcept { return cursor.stage >= 1 && cursor.iteration >= 1; }

}  // namespace labloop
