#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "labloop/cursor.hpp"
#include "labloop/model.hpp"

namespace labloop {

struct Modulator {
  std::string name;
  int parts = 1;

  friend bool operator==(const Modulator&, const Modulator&) = default;
};

struct LmRatio {
  int linker_parts = 1;
  int metal_parts = 1;

  friend bool operator==(const LmRatio&, const LmRatio&) = default;
};

struct ScreeningRecord {
  int exp_id = 0;
  std::string linker;
  std::vector<Modulator> modulators;
  LmRatio lm_ratio;
  int temp_c = 0;
  int time_h = 0;

  friend bool operator==(const ScreeningRecord&, const ScreeningRecord&) = default;
};

using ModulatorVocabulary = std::set<std::string, std::less<>>;

const ModulatorVocabulary& default_modulator_vocabulary();

// Fields: exp_id, linker, modulator, lm_ratio, temp_c, time_h. Modulator is a
// single code ("FA") or a mixture "A/B (p:q)". Unicode subscript digits are
// folded to ASCII first. Checks run linker, modulator, ratio, then integers,
// so the first reported error is the most specific one. Throws BadRatio,
// UnknownModulatorCode, NonIntegerField, InvalidArgument.
ScreeningRecord parse_screening_row(const std::vector<std::string>& fields,
                                    const ModulatorVocabulary& vocabulary = default_modulator_vocabulary());
ScreeningRecord parse_screening_row(std::string_view csv_line,
                                    const ModulatorVocabulary& vocabulary = default_modulator_vocabulary());

// Expects the fixed header "exp_id,linker,modulator,lm_ratio,temp_c,time_h".
// Row errors carry the 1-based line number in their detail.
std::vector<ScreeningRecord> load_screening_csv(const std::string& path,
                                                const ModulatorVocabulary& vocabulary = default_modulator_vocabulary());

std::string format_modulators(const std::vector<Modulator>& modulators);
std::string format_ratio(LmRatio ratio);

struct LinkerSummary {
  std::string linker;
  int count = 0;
  int temp_min = 0;
  int temp_max = 0;
  int time_min = 0;
  int time_max = 0;

  friend bool operator==(const LinkerSummary&, const LinkerSummary&) = default;
};

struct DatasetSummary {
  std::vector<LinkerSummary> linkers;  // first-appearance order
  int total = 0;

  const LinkerSummary* find(std::string_view linker) const;
};

// Throws DuplicateExpId.
DatasetSummary dataset_summary(const std::vector<ScreeningRecord>& records);

// Exp ids of `subset` rows that are absent from `full` or differ from it in
// any field.
std::vector<int> subset_mismatches(const std::vector<ScreeningRecord>& subset,
                                   const std::vector<ScreeningRecord>& full);

// Names from {"modulator", "lm_ratio", "temp", "time"} that differ.
std::vector<std::string> changed_parameters(const ScreeningRecord& a, const ScreeningRecord& b);

struct ParameterDiff {
  std::string linker;
  int from_exp = 0;
  int to_exp = 0;
  std::vector<std::string> changed;

  bool multi_param_change() const noexcept { return changed.size() > 1; }
  friend bool operator==(const ParameterDiff&, const ParameterDiff&) = default;
};

// Consecutive pairs (ascending exp_id) within each linker group.
std::vector<ParameterDiff> parameter_diff_report(const std::vector<ScreeningRecord>& records);

struct StageIterations {
  std::vector<int> per_stage;  // index s-1 holds the highest iteration reached in stage s
  int total = 0;

  friend bool operator==(const StageIterations&, const StageIterations&) = default;
};

// The trajectory must start at 1-1 and move only to (s, i+1) or (s+1, 1).
// `stage_count` pads per_stage with zeros; 0 means "highest stage seen".
// Throws NonMonotonicTrajectory.
StageIterations iteration_stats(const std::vector<StageCursor>& trajectory, int stage_count = 0);

struct CampaignIterations {
  std::string campaign;
  StageIterations stats;
};

// Fixed-width comparison table: one row per campaign, one column per stage.
std::string format_iteration_table(const std::vector<CampaignIterations>& rows);

json to_json_value(const ScreeningRecord& v);
json to_json_value(const DatasetSummary& v);
json to_json_value(const ParameterDiff& v);
json to_json_value(const StageIterations& v);
json to_json_value(const std::vector<CampaignIterations>& v);

}  // namespace labloop
