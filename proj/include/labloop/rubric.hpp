#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "labloop/model.hpp"

namespace labloop {

// Percentage truncated (not rounded) to one decimal, kept as integer tenths:
// 100 * num / den = 90.196... -> 901.
int truncated_percent_tenths(long long num, long long den);
std::string format_tenths(int tenths);

struct CriterionResult {
  std::string name;
  int sum = 0;
  double raw_percent = 0.0;
  int percent_tenths = 0;
};

struct RubricReport {
  int task_count = 0;
  CriterionResult relevance;
  CriterionResult progress;
  CriterionResult helpfulness;
  int total_sum = 0;
  double total_raw_percent = 0.0;
  int total_percent_tenths = 0;
};

// Throws ZeroTasks; InvalidArgument when there are more scores than tasks.
RubricReport aggregate(const std::vector<RubricScore>& scores, int task_count);

// Printed reference values for one campaign's rubric table.
struct PublishedRubric {
  int task_count = 0;
  int relevance_sum = 0;
  int progress_sum = 0;
  int helpfulness_sum = 0;
  int total_sum = 0;
  int relevance_tenths = 0;
  int progress_tenths = 0;
  int helpfulness_tenths = 0;
  int total_tenths = 0;
};

PublishedRubric published_rubric_from_json(const json& j);

struct DocumentedDiscrepancy {
  std::string row;  // "Relevance", ..., "Total"
  std::string field;  // "sum" or "percent"
  std::string computed;
  std::string published;
};

std::vector<DocumentedDiscrepancy> compare_with_published(const RubricReport& report, const PublishedRubric& published);

// Criteria / Score / Percentage table; with `published`, adds the printed
// column and a flag on every row that disagrees.
std::string format_rubric_table(const RubricReport& report, const std::optional<PublishedRubric>& published = {});

json to_json_value(const RubricReport& report);
json to_json_value(const DocumentedDiscrepancy& d);

// Header "task_ref,relevance,progress,helpfulness,total".
std::string export_scores_csv(const std::vector<RubricScore>& scores);

// Accepts the export format or "campaign,cursor,choice,relevance,progress,
// helpfulness,total". A present total must equal the criterion sum.
std::vector<RubricScore> import_scores_csv(std::string_view text);

TaskRef parse_task_ref(std::string_view text);

}  // namespace labloop
