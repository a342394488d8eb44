#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace labloop {

// Sentence count under the project-wide tokenizer: a sentence ends at '.', '!'
// or '?' followed by ASCII whitespace or end of text. A trailing fragment with
// no terminator still counts. Segments without any letter or digit (e.g. an
// ellipsis on its own) are not sentences. "8.5" never splits because the '.'
// is followed by a digit.
int count_sentences(std::string_view text);

// "five" for 5; numbers above ten stay numeric.
std::string number_word(int n);

std::string_view trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);
std::string collapse_whitespace(std::string_view text);
bool starts_with_ci(std::string_view text, std::string_view prefix);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Maps Unicode subscript digits (U+2080..U+2089) to ASCII digits.
std::string normalize_subscripts(std::string_view text);

// RFC 4180-style field split for a single CSV record (quotes, doubled quotes).
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

std::string sha256_hex(std::string_view data);

// UTC wall clock, second resolution, e.g. "2024-05-01T12:00:00Z".
std::string utc_timestamp();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace labloop
