#pragma once

#include <map>
#include <string>
#include <vector>

namespace labloop {

// Text with `{name}` placeholders (names may contain letters, digits, spaces,
// '_' and '-'). Rendering is a single left-to-right pass, so substituted
// values are never re-scanned; placeholders without a value are kept verbatim.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

  const std::string& text() const noexcept { return text_; }
  std::vector<std::string> placeholders() const;
  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  std::string text_;
};

// Built-in phase prompts.
const PromptTemplate& default_navigator_template();
const PromptTemplate& default_exemplar_block_template();
const PromptTemplate& default_executor_template();

}  // namespace labloop
