#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "labloop/cursor.hpp"
#include "labloop/labdata.hpp"

namespace labloop {

// One row of navigator/index.csv.
struct CorpusTurn {
  std::string campaign;
  int turn = 0;
  StageCursor cursor;
  bool sentinel = false;  // the human declared readiness after this turn
  std::string file;       // relative to the corpus root
  bool summary_elided = false;
  bool choice3_elided = false;
};

struct CorpusCampaign {
  std::string key;     // "H", "oF", "mF", "CH3"
  std::string linker;  // "BTB-H", ...
  std::vector<CorpusTurn> turns;
};

// Read-only view of the bundled transcript corpus directory.
class Corpus {
 public:
  // Throws StorageFailure or CorruptLog on a malformed index.
  static Corpus load(const std::string& dir);

  const std::string& dir() const noexcept { return dir_; }
  const std::vector<CorpusCampaign>& campaigns() const noexcept { return campaigns_; }
  // Throws NoSuchCampaign.
  const CorpusCampaign& campaign(std::string_view key) const;

  std::string path(std::string_view relative) const;
  std::string read(std::string_view relative) const;
  std::string turn_text(const CorpusTurn& turn) const;
  std::string final_summary(std::string_view key) const;
  int turn_count() const;

 private:
  std::string dir_;
  std::vector<CorpusCampaign> campaigns_;
};

// Canned human feedback for replaying a corpus turn; carries the sentinel
// phrase exactly when the index marks the turn as a stage boundary.
std::string corpus_feedback_text(const CorpusTurn& turn);

struct CursorStep {
  StageCursor from;
  StageCursor to;
};

struct CampaignVerification {
  std::string key;
  int turns = 0;
  int parsed = 0;
  int cursor_matches = 0;
  int elided_summaries = 0;
  int elided_choices = 0;
  bool completed = false;
  std::vector<CursorStep> sentinel_advances;
  StageIterations stats;
  std::vector<std::string> problems;

  bool ok() const noexcept { return problems.empty(); }
};

struct CorpusVerification {
  std::vector<CampaignVerification> campaigns;

  bool ok() const noexcept;
  int turns() const noexcept;
  const CampaignVerification& campaign(std::string_view key) const;
};

// Replays every campaign through parse_navigator_output and advance_cursor,
// starting from 1-1 with K = 5, and checks every parsed cursor against the
// advance rule and the index.
CorpusVerification verify_corpus(const Corpus& corpus);

std::string format_verification(const CorpusVerification& v);
json to_json_value(const CorpusVerification& v);

}  // namespace labloop
