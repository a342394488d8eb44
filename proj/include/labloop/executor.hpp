#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "labloop/model.hpp"
#include "labloop/prompt_template.hpp"

namespace labloop {

using StageSummary = std::pair<StageCursor, std::string>;

// Memory channel for the executor: the last accepted turn of every stage
// before the campaign's current stage.
std::vector<StageSummary> stage_summaries_for(const Campaign& campaign);

// Throws MissingBlueprint, InvalidChoiceIndex.
std::string render_executor_prompt(const Campaign& campaign, const std::vector<StageSummary>& stage_summaries,
                                   const NavigatorOutput& current, int chosen,
                                   const PromptTemplate& tmpl = default_executor_template());

// Consolidated summary is everything before the "Step-by-step" header (a
// leading "Summary:" label dropped). Steps are the "N." / "N)" lines between
// that header and the "Template" header, each keeping its printed numeral;
// unnumbered lines continue the previous step. The report template is the
// text after the "Template" header line. Throws MissingStepsSection,
// MissingTemplateSection.
ExecutorBrief parse_executor_output(std::string_view text);

// Every outermost "[...]" span, in order, duplicates kept.
std::vector<std::string> extract_slots(std::string_view report_template);

struct InstantiatedReport {
  std::string text;
  std::vector<std::string> unfilled;  // distinct slot names, first-occurrence order
};

// Replaces every occurrence of each supplied slot. Throws UnknownSlotName.
InstantiatedReport instantiate_report(const ExecutorBrief& brief, const std::map<std::string, std::string>& values);

}  // namespace labloop
