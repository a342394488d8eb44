#include "labloop/reports.hpp"

#include <filesystem>
#include <sstream>

#include "labloop/error.hpp"
#include "labloop/text.hpp"

namespace labloop {

RubricReport campaign_rubric(const Campaign& campaign) {
  return aggregate(campaign.scores, static_cast<int>(campaign.accepted_turns().size()) * 3);
}

std::optional<PublishedRubric> published_rubric_for(const std::string& corpus_dir, const std::string& campaign_key) {
  std::string lowered = to_lower_ascii(campaign_key);
  const std::string path = corpus_dir + "/rubric/published_" + lowered + ".json";
  if (campaign_key.empty() || !std::filesystem::exists(path)) return std::nullopt;
  return published_rubric_from_json(json::parse(read_file(path)));
}

StageIterations campaign_iterations(const Campaign& campaign) {
  std::vector<StageCursor> trajectory;
  for (const auto* t : campaign.accepted_turns()) trajectory.push_back(t->cursor);
  if (trajectory.empty()) return StageIterations{std::vector<int>(static_cast<std::size_t>(campaign.stage_count), 0), 0};
  return iteration_stats(trajectory, campaign.stage_count);
}

ScreeningReport screening_report(const std::string& corpus_dir) {
  const auto full = load_screening_csv(corpus_dir + "/screening/full.csv");
  const auto subset = load_screening_csv(corpus_dir + "/screening/subset.csv");
  ScreeningReport r;
  r.summary = dataset_summary(full);
  r.subset_rows = static_cast<int>(subset.size());
  r.subset_mismatches = subset_mismatches(subset, full);
  r.diffs = parameter_diff_report(full);
  return r;
}

std::string format_screening_report(const ScreeningReport& report) {
  std::ostringstream out;
  out << "linker    rows  temp (C)   time (h)\n";
  for (const auto& l : report.summary.linkers) {
    std::string name = l.linker;
    name.resize(std::max<std::size_t>(name.size(), 9), ' ');
    std::string rows = std::to_string(l.count);
    rows.insert(0, rows.size() < 4 ? 4 - rows.size() : 0, ' ');
    std::string temp = std::to_string(l.temp_min) + "-" + std::to_string(l.temp_max);
    temp.resize(std::max<std::size_t>(temp.size(), 10), ' ');
    out << name << " " << rows << "  " << temp << " " << l.time_min << "-" << l.time_max << "\n";
  }
  out << "total     " << report.summary.total << "\n";
  int multi = 0;
  for (const auto& d : report.diffs) multi += d.multi_param_change() ? 1 : 0;
  out << "subset rows: " << report.subset_rows << ", mismatching full-table rows: " << report.subset_mismatches.size()
      << "\n";
  out << "consecutive pairs: " << report.diffs.size() << ", changing more than one parameter: " << multi << "\n";
  for (const auto& d : report.diffs) {
    if (!d.multi_param_change()) continue;
    out << "  " << d.linker << " " << d.from_exp << " -> " << d.to_exp << ": " << join(d.changed, ", ") << "\n";
  }
  return out.str();
}

json to_json_value(const ScreeningReport& report) {
  json diffs = json::array();
  for (const auto& d : report.diffs) diffs.push_back(to_json_value(d));
  return {{"summary", to_json_value(report.summary)},
          {"subset_rows", report.subset_rows},
          {"subset_mismatches", report.subset_mismatches},
          {"diffs", diffs}};
}

}  // namespace labloop
