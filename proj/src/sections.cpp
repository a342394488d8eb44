#include "sections.hpp"

#include "labloop/text.hpp"

namespace labloop::detail {

namespace {

bool is_emphasis(char c) { return c == '*' || c == '_'; }

}  // namespace

std::string_view strip_decoration(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '#' || line[i] == '>' ||
                             is_emphasis(line[i]))) {
    ++i;
  }
  return line.substr(i);
}

std::optional<std::string_view> match_label(std::string_view line, std::string_view label) {
  std::string_view s = strip_decoration(line);
  if (!starts_with_ci(s, label)) return std::nullopt;
  std::size_t i = label.size();
  while (i < s.size() && is_emphasis(s[i])) ++i;
  while (i < s.size() && s[i] == ' ') ++i;
  bool colon = false;
  if (i < s.size() && s[i] == ':') {
    colon = true;
    ++i;
  }
  while (i < s.size() && is_emphasis(s[i])) ++i;
  std::string_view rest = s.substr(i);
  if (!colon && !trim(rest).empty()) return std::nullopt;
  return trim(rest);
}

bool is_placeholder(std::string_view body) {
  body = trim(body);
  return body.size() >= 2 && body.front() == '<' && body.back() == '>' &&
         body.find('\n') == std::string_view::npos;
}

}  // namespace labloop::detail
