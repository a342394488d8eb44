#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "labloop/cursor.hpp"
#include "labloop/model.hpp"
#include "labloop/prompt_template.hpp"
#include "labloop/provider.hpp"

namespace labloop {

enum class MatchMode { Substring, Line };

// "Must contain" check of a probe output: `Line` needs a whole line equal to
// the pattern after trimming both; `Substring` needs the pattern anywhere.
struct ExpectedOutput {
  std::string pattern;
  MatchMode mode = MatchMode::Substring;

  bool matches(std::string_view output) const;
};

struct Verdict {
  bool accept = false;
  std::string note;  // revision request; empty for Accept

  static Verdict accepted() { return {true, {}}; }
  static Verdict revise(std::string note) { return {false, std::move(note)}; }
};

struct RefinementRound {
  std::string writer_request;
  std::string candidate;
  std::optional<std::string> probe_input;
  std::optional<std::string> probe_output;
  std::optional<ExpectedOutput> expected;
  std::optional<bool> matched;
  std::optional<Verdict> verdict;
};

enum class SessionStatus { Open, Accepted };

struct RefinementSession {
  std::string id;
  std::string template_name;  // name the accepted candidate is exported under
  std::string goal_statement;
  int round_cap = 0;          // 0 = unlimited
  std::vector<RefinementRound> rounds;
  SessionStatus status = SessionStatus::Open;
  std::optional<std::string> exported_path;

  // Revision notes from every judged round, oldest first.
  std::vector<std::string> revision_notes() const;
};

std::string_view to_string(SessionStatus status);
json to_json_value(const RefinementSession& session);

// Versioned prompt templates on disk: <dir>/<name>.v<N>.txt.
class TemplateRegistry {
 public:
  explicit TemplateRegistry(std::string dir);

  struct Exported {
    std::string name;
    int version = 0;
    std::string path;
  };

  Exported export_template(const std::string& name, const std::string& text);
  std::optional<PromptTemplate> latest(const std::string& name) const;
  int latest_version(const std::string& name) const;  // 0 when none
  const std::string& dir() const noexcept { return dir_; }

 private:
  std::string dir_;
};

// Sessions persist as JSONL event files under <data_dir>/refinery/; accepted
// candidates are exported to <data_dir>/templates/.
class Refinery {
 public:
  explicit Refinery(std::string data_dir);

  // Throws InvalidArgument on an empty goal statement.
  RefinementSession open_session(const std::string& template_name, const std::string& goal_statement,
                                 int round_cap = 0, std::optional<std::string> id = std::nullopt);

  // Sends the goal plus every revision note and the previous candidate to
  // the writer in one fresh call; starts a new round with the reply.
  RefinementSession compose_candidate(const std::string& session_id, Provider& writer);

  // Probes the current candidate with `probe_input` appended in one fresh
  // call. A provider failure leaves the session unchanged.
  RefinementSession probe_candidate(const std::string& session_id, const std::string& probe_input,
                                    const ExpectedOutput& expected, Provider& probe);

  // Throws NoProbeYet. Accept closes the session and exports the candidate.
  RefinementSession record_verdict(const std::string& session_id, const Verdict& verdict);

  RefinementSession load(const std::string& session_id) const;
  std::vector<std::string> list() const;
  TemplateRegistry& templates() noexcept { return registry_; }

 private:
  void append(const std::string& session_id, const std::string& kind, json payload);
  std::string path(const std::string& session_id) const;

  std::string dir_;
  TemplateRegistry registry_;
};

// Folds refinement events. Throws CorruptLog.
RefinementSession replay_session(const std::vector<json>& events);

// Writer request for the next round of `session`.
std::string writer_request_for(const RefinementSession& session);

// Probe prompt: candidate, a blank line, then the probe input.
std::string probe_prompt(const std::string& candidate, const std::string& probe_input);

// Values of the "Current Summary", "Last Iteration", "Latest Task" and "Human
// Feedback" lines of a probe input, keyed by the navigator placeholder names
// ("summary", "iteration", "last task", "human feedback").
std::map<std::string, std::string> probe_values(std::string_view probe_input);

struct CursorProbe {
  StageCursor expected;
  std::optional<StageCursor> actual;
  std::string error;  // parse failure, if any

  bool passed() const noexcept { return actual && *actual == expected; }
};

// Parses `probe_output` as a navigator response and compares its cursor
// with advance_cursor applied to the probe input's last iteration and
// feedback.
CursorProbe check_probe_cursor(std::string_view probe_input, std::string_view probe_output, int stage_count = 5);

}  // namespace labloop
