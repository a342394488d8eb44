#include "labloop/prompt_template.hpp"

#include <algorithm>
#include <optional>

namespace labloop {

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == ' ' || c == '_' ||
         c == '-';
}

// Returns the placeholder name starting at text[pos] == '{', if any.
std::optional<std::string> placeholder_at(const std::string& text, std::size_t pos) {
  auto close = text.find('}', pos + 1);
  if (close == std::string::npos || close == pos + 1) return std::nullopt;
  std::string name = text.substr(pos + 1, close - pos - 1);
  if (!std::all_of(name.begin(), name.end(), is_name_char)) return std::nullopt;
  if (name.front() == ' ' || name.back() == ' ') return std::nullopt;
  return name;
}

}  // namespace

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] != '{') continue;
    if (auto name = placeholder_at(text_, i)) {
      if (std::find(out.begin(), out.end(), *name) == out.end()) out.push_back(*name);
      i += name->size() + 1;
    }
  }
  return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  std::string out;
  out.reserve(text_.size());
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '{') {
      if (auto name = placeholder_at(text_, i)) {
        auto it = values.find(*name);
        if (it != values.end()) {
          out += it->second;
          i += name->size() + 1;
          continue;
        }
      }
    }
    out.push_back(text_[i]);
  }
  return out;
}

const PromptTemplate& default_navigator_template() {
  static const PromptTemplate kTemplate(
      R"(You are an AI reticular chemist assisting a human apprentice in a research project to develop a novel aluminum MOF using {linker name} as a linker. The project is structured into {stage count} stages:

{stage list}

{exemplar block}In each interaction, you'll be provided with the current project summary, the most recent task suggestion, and the feedback from the human apprentice. With these inputs, you should generate the following:

Output Summary: Construct an updated summary that primarily draw from the previous summary, adding only one or two sentences regarding the latest task and its outcomes based on human feedback, and another one sentence discussing the status of the current stage.

The summary should tell the story of the project so far, summarizing both successes and failures from all completed stages and tasks. Keep in mind that it is important to maintain the vital details from each stage. The summary part should not exceed 30 sentences. If it does, you should condense earlier information.

Current Stage and Iteration: Indicate this with a numerical pair (e.g., 2-6), where the first number refers to the current stage and the second to the iteration within this stage. You should only advance to the next stage when the apprentice explicitly states, "I'm ready to move to the next stage." Upon this declaration, you can immediately update the stage and iteration pair in your output to reflect progress (e.g., from 3-6 to 4-1). Otherwise, you will add one to the iteration number (e.g. from 3-6 to 3-7).

Output Status Evaluation: Explain the reason behind the results reported by the human apprentice based on your most recent task suggestion. This should be a short (one or two sentence) analysis. Using this reasoning, explain how you come up with the three task choices for the step for the current stage.

Output Task Choices: Offer three task options that the apprentice can choose from for the next step, each consisting of 10 to 20 sentences and should be presented in a detailed, step-by-step manner to instruct the human what to do next. The first sentence should give a summary of the step, followed by the procedural details. If the apprentice's feedback implies the completion of a stage, one of your choices can be encouraging the apprentice to state, "I'm ready to move to the next stage." Always remember to only suggest tasks relevant to the current stage and avoid proposing tasks related to upcoming stages.

Here are the inputs:

""

Current Summary: {summary}

Last Iteration: {iteration}

Latest Task: {last task}

Human Feedback: {human feedback}

""

I need you to only respond in the format as described below:

""

Output Summary: <updated summary>

Current Stage and Iteration: <X-X>

Status Evaluation: <reasoning>

Task Choice 1: <next task choice 1>

Task Choice 2: <alternative next task choice>

Task Choice 3: <alternative next task choice>

""
)");
  return kTemplate;
}

const PromptTemplate& default_exemplar_block_template() {
  static const PromptTemplate kTemplate(
      R"(Below is an example of work summary of another project using {another linker name} linker, and it is suggested that you make similar attempts:

...
{full summary example}
...

)");
  return kTemplate;
}

const PromptTemplate& default_executor_template() {
  static const PromptTemplate kTemplate(
      R"(You are an AI reticular chemist assisting a human apprentice in a research project to develop a novel aluminum MOF using {linker name} as a linker. The project is structured into {stage count} stages:

{stage list}

You have already collaborated with the human apprentice to complete a few stages, and at the end of each stage, you have written down a summary. Below, I will provide you with these summaries, and your first job is to consolidate them into a comprehensive summary. This final summary should be as explicit as possible, detailing every success and failure at all stages. There is no word limit for the final summary. It will be used to instruct and inform another AI reticular chemist, who will guide another human apprentice to carry out a similar research project. Second, your job is to show me step by step how do choice {number} and give me a template on how to report to you the results.

Here are the inputs:

""

{stage summaries}Current Stage and Iteration: {iteration}, Output Summary: {most recent summary};

Status Evaluation: {reasoning}

Task Choice 1: {task 1 content}

Task Choice 2: {task 2 content}

Task Choice 3: {task 3 content}

""
)");
  return kTemplate;
}

}  // namespace labloop
