#pragma once

#include <optional>
#include <string>
#include <vector>

#include "labloop/labdata.hpp"
#include "labloop/model.hpp"
#include "labloop/rubric.hpp"

namespace labloop {

// Rubric over every task the campaign offered (accepted turns x 3); unscored
// tasks count as zero. Throws ZeroTasks before the first turn.
RubricReport campaign_rubric(const Campaign& campaign);

// <corpus_dir>/rubric/published_<key>.json, when present.
std::optional<PublishedRubric> published_rubric_for(const std::string& corpus_dir, const std::string& campaign_key);

// Per-stage iteration counts from the accepted turns' cursors.
StageIterations campaign_iterations(const Campaign& campaign);

// Bundled screening tables: full set, its published subset, and the
// per-linker consecutive-run parameter diffs.
struct ScreeningReport {
  DatasetSummary summary;
  int subset_rows = 0;
  std::vector<int> subset_mismatches;
  std::vector<ParameterDiff> diffs;
};

ScreeningReport screening_report(const std::string& corpus_dir);
std::string format_screening_report(const ScreeningReport& report);
json to_json_value(const ScreeningReport& report);

}  // namespace labloop
