#include "labloop/refinery.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>

#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/text.hpp"
#include "sections.hpp"

namespace labloop {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSessionSchema = "labloop.refinement-events";
constexpr std::string_view kQuoteFence = "\"\"";

bool valid_name(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
  });
}

std::string_view to_string(MatchMode m) { return m == MatchMode::Line ? "line" : "substring"; }

MatchMode match_mode_from(const std::string& s) {
  if (s == "line") return MatchMode::Line;
  if (s == "substring") return MatchMode::Substring;
  throw Error(ErrorCode::InvalidArgument, "match mode " + s);
}

void fold_event(RefinementSession& s, const json& e) {
  const std::string kind = e.at("kind").get<std::string>();
  const json& p = e.at("payload");
  if (kind == "SessionOpened") {
    if (!s.id.empty()) throw Error(ErrorCode::IllegalTransition, "session already opened");
    s.id = p.at("id").get<std::string>();
    s.template_name = p.at("template_name").get<std::string>();
    s.goal_statement = p.at("goal_statement").get<std::string>();
    s.round_cap = p.value("round_cap", 0);
    return;
  }
  if (s.id.empty()) throw Error(ErrorCode::IllegalTransition, kind + " before SessionOpened");
  if (s.status != SessionStatus::Open) throw Error(ErrorCode::SessionClosed, kind);
  if (kind == "CandidateComposed") {
    if (!s.rounds.empty() && !s.rounds.back().verdict) {
      throw Error(ErrorCode::IllegalTransition, "the current candidate has no verdict yet");
    }
    if (s.round_cap > 0 && static_cast<int>(s.rounds.size()) >= s.round_cap) {
      throw Error(ErrorCode::IllegalTransition, "round cap of " + std::to_string(s.round_cap) + " reached");
    }
    RefinementRound r;
    r.writer_request = p.at("writer_request").get<std::string>();
    r.candidate = p.at("candidate").get<std::string>();
    s.rounds.push_back(std::move(r));
  } else if (kind == "ProbeRecorded") {
    if (s.rounds.empty() || s.rounds.back().verdict) throw Error(ErrorCode::IllegalTransition, "no candidate to probe");
    RefinementRound& r = s.rounds.back();
    r.probe_input = p.at("probe_input").get<std::string>();
    r.probe_output = p.at("probe_output").get<std::string>();
    r.expected = ExpectedOutput{p.at("expected").get<std::string>(), match_mode_from(p.at("mode").get<std::string>())};
    r.matched = r.expected->matches(*r.probe_output);
  } else if (kind == "VerdictRecorded") {
    if (s.rounds.empty() || !s.rounds.back().probe_output) throw Error(ErrorCode::NoProbeYet);
    if (s.rounds.back().verdict) throw Error(ErrorCode::IllegalTransition, "round already judged");
    const bool accept = p.at("accept").get<bool>();
    s.rounds.back().verdict = Verdict{accept, p.value("note", std::string{})};
    if (accept) s.status = SessionStatus::Accepted;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown refinement event " + kind);
  }
}

}  // namespace

bool ExpectedOutput::matches(std::string_view output) const {
  if (mode == MatchMode::Substring) return output.find(pattern) != std::string_view::npos;
  const std::string_view want = trim(pattern);
  for (std::string_view line : split_lines(output)) {
    if (trim(line) == want) return true;
  }
  return false;
}

std::vector<std::string> RefinementSession::revision_notes() const {
  std::vector<std::string> notes;
  for (const auto& r : rounds) {
    if (r.verdict && !r.verdict->accept && !r.verdict->note.empty()) notes.push_back(r.verdict->note);
  }
  return notes;
}

std::string_view to_string(SessionStatus status) { return status == SessionStatus::Open ? "Open" : "Accepted"; }

json to_json_value(const RefinementSession& session) {
  json rounds = json::array();
  for (const auto& r : session.rounds) {
    json jr = {{"writer_request", r.writer_request}, {"candidate", r.candidate}};
    jr["probe_input"] = r.probe_input ? json(*r.probe_input) : json(nullptr);
    jr["probe_output"] = r.probe_output ? json(*r.probe_output) : json(nullptr);
    jr["expected"] = r.expected ? json{{"pattern", r.expected->pattern}, {"mode", to_string(r.expected->mode)}}
                                : json(nullptr);
    jr["matched"] = r.matched ? json(*r.matched) : json(nullptr);
    jr["verdict"] = r.verdict ? json{{"accept", r.verdict->accept}, {"note", r.verdict->note}} : json(nullptr);
    rounds.push_back(jr);
  }
  return {{"id", session.id},
          {"template_name", session.template_name},
          {"goal_statement", session.goal_statement},
          {"round_cap", session.round_cap},
          {"status", to_string(session.status)},
          {"exported_path", session.exported_path ? json(*session.exported_path) : json(nullptr)},
          {"rounds", rounds}};
}

TemplateRegistry::TemplateRegistry(std::string dir) : dir_(std::move(dir)) {}

int TemplateRegistry::latest_version(const std::string& name) const {
  if (!fs::exists(dir_)) return 0;
  const std::regex pattern(R"((.+)\.v(\d+)\.txt)");
  int best = 0;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    std::smatch m;
    const std::string file = entry.path().filename().string();
    if (std::regex_match(file, m, pattern) && m[1] == name) best = std::max(best, std::stoi(m[2]));
  }
  return best;
}

TemplateRegistry::Exported TemplateRegistry::export_template(const std::string& name, const std::string& text) {
  if (!valid_name(name)) throw Error(ErrorCode::InvalidArgument, "template name must match [A-Za-z0-9_-]{1,64}");
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, dir_ + ": " + ec.message());
  const int version = latest_version(name) + 1;
  const std::string path = dir_ + "/" + name + ".v" + std::to_string(version) + ".txt";
  write_file(path, text);
  return {name, version, path};
}

std::optional<PromptTemplate> TemplateRegistry::latest(const std::string& name) const {
  const int v = latest_version(name);
  if (v == 0) return std::nullopt;
  return PromptTemplate(read_file(dir_ + "/" + name + ".v" + std::to_string(v) + ".txt"));
}

Refinery::Refinery(std::string data_dir)
    : dir_(data_dir + "/refinery"), registry_(data_dir + "/templates") {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, dir_ + ": " + ec.message());
}

std::string Refinery::path(const std::string& session_id) const { return dir_ + "/" + session_id + ".jsonl"; }

std::vector<std::string> Refinery::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void Refinery::append(const std::string& session_id, const std::string& kind, json payload) {
  // Validate against the current state before anything reaches disk.
  const bool fresh = !fs::exists(path(session_id));
  RefinementSession current = fresh ? RefinementSession{} : load(session_id);
  json e;
  e["kind"] = kind;
  e["at"] = utc_timestamp();
  e["payload"] = std::move(payload);
  fold_event(current, e);
  std::ofstream out(path(session_id), std::ios::app | std::ios::binary);
  if (fresh) out << json{{"schema", kSessionSchema}, {"version", 1}, {"session_id", session_id}}.dump() << "\n";
  out << e.dump() << "\n";
  out.flush();
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot append to " + path(session_id));
}

RefinementSession replay_session(const std::vector<json>& events) {
  RefinementSession s;
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      fold_event(s, events[i]);
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::CorruptLog, std::to_string(i + 1) + ": " + ex.what());
    }
  }
  return s;
}

RefinementSession Refinery::load(const std::string& session_id) const {
  if (!valid_name(session_id) || !fs::exists(path(session_id))) throw Error(ErrorCode::NoSuchCampaign, "no refinement session " + session_id);
  std::string text = read_file(path(session_id));
  std::vector<json> events;
  bool header = false;
  for (std::string_view line : split_lines(text)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::CorruptLog, std::to_string(events.size() + 1) + ": unparseable line");
    if (!header) {
      if (j.value("schema", std::string{}) != kSessionSchema) throw Error(ErrorCode::CorruptLog, "0: missing header");
      header = true;
      continue;
    }
    if (j.value("kind", std::string{}) == "TemplateExported") continue;
    events.push_back(std::move(j));
  }
  RefinementSession s = replay_session(events);
  if (s.status == SessionStatus::Accepted) {
    for (std::string_view line : split_lines(text)) {
      json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.value("kind", std::string{}) == "TemplateExported") {
        s.exported_path = j.at("payload").at("path").get<std::string>();
      }
    }
  }
  return s;
}

RefinementSession Refinery::open_session(const std::string& template_name, const std::string& goal_statement,
                                         int round_cap, std::optional<std::string> id) {
  if (trim(goal_statement).empty()) throw Error(ErrorCode::InvalidArgument, "goal statement is empty");
  if (!valid_name(template_name)) throw Error(ErrorCode::InvalidArgument, "template name must match [A-Za-z0-9_-]{1,64}");
  std::string sid = id.value_or("");
  if (sid.empty()) {
    auto ids = list();
    for (int n = static_cast<int>(ids.size()) + 1;; ++n) {
      sid = "r" + std::to_string(n);
      if (std::find(ids.begin(), ids.end(), sid) == ids.end()) break;
    }
  }
  if (!valid_name(sid)) throw Error(ErrorCode::InvalidArgument, "session id must match [A-Za-z0-9_-]{1,64}");
  if (fs::exists(path(sid))) throw Error(ErrorCode::InvalidArgument, "session " + sid + " already exists");
  append(sid, "SessionOpened",
         {{"id", sid}, {"template_name", template_name}, {"goal_statement", goal_statement}, {"round_cap", round_cap}});
  return load(sid);
}

std::string writer_request_for(const RefinementSession& session) {
  std::string request(trim(session.goal_statement));
  for (const auto& note : session.revision_notes()) request += "\n\n" + std::string(trim(note));
  if (!session.rounds.empty()) {
    request += "\n\nPrompt:\n\n";
    request += kQuoteFence;
    request += "\n\n" + std::string(trim(session.rounds.back().candidate)) + "\n\n";
    request += kQuoteFence;
  }
  return request;
}

RefinementSession Refinery::compose_candidate(const std::string& session_id, Provider& writer) {
  RefinementSession s = load(session_id);
  if (s.status != SessionStatus::Open) throw Error(ErrorCode::SessionClosed, session_id);
  if (!s.rounds.empty() && !s.rounds.back().verdict) {
    throw Error(ErrorCode::IllegalTransition, "the current candidate has no verdict yet");
  }
  if (s.round_cap > 0 && static_cast<int>(s.rounds.size()) >= s.round_cap) {
    throw Error(ErrorCode::IllegalTransition, "round cap of " + std::to_string(s.round_cap) + " reached");
  }
  const std::string request = writer_request_for(s);
  const std::string candidate(trim(writer.chat(request)));
  append(session_id, "CandidateComposed", {{"writer_request", request}, {"candidate", candidate}});
  return load(session_id);
}

std::string probe_prompt(const std::string& candidate, const std::string& probe_input) {
  return std::string(trim(candidate)) + "\n\n" + std::string(trim(probe_input)) + "\n";
}

RefinementSession Refinery::probe_candidate(const std::string& session_id, const std::string& probe_input,
                                            const ExpectedOutput& expected, Provider& probe) {
  RefinementSession s = load(session_id);
  if (s.status != SessionStatus::Open || s.rounds.empty() || s.rounds.back().verdict) {
    throw Error(ErrorCode::IllegalTransition, "no open candidate to probe");
  }
  if (trim(s.rounds.back().candidate).empty()) throw Error(ErrorCode::InvalidArgument, "candidate is empty");
  const std::string output = probe.chat(probe_prompt(s.rounds.back().candidate, probe_input));
  append(session_id, "ProbeRecorded",
         {{"probe_input", probe_input},
          {"probe_output", output},
          {"expected", expected.pattern},
          {"mode", to_string(expected.mode)}});
  return load(session_id);
}

RefinementSession Refinery::record_verdict(const std::string& session_id, const Verdict& verdict) {
  RefinementSession s = load(session_id);
  if (s.status != SessionStatus::Open) throw Error(ErrorCode::SessionClosed, session_id);
  if (s.rounds.empty() || !s.rounds.back().probe_output) throw Error(ErrorCode::NoProbeYet);
  append(session_id, "VerdictRecorded", {{"accept", verdict.accept}, {"note", verdict.note}});
  if (verdict.accept) {
    auto exported = registry_.export_template(s.template_name, s.rounds.back().candidate);
    std::ofstream out(path(session_id), std::ios::app | std::ios::binary);
    out << json{{"kind", "TemplateExported"},
                {"at", utc_timestamp()},
                {"payload", {{"name", exported.name}, {"version", exported.version}, {"path", exported.path}}}}
               .dump()
        << "\n";
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot append to " + path(session_id));
  }
  return load(session_id);
}

std::map<std::string, std::string> probe_values(std::string_view probe_input) {
  static const std::vector<std::pair<std::string_view, std::string>> kLabels = {
      {"Current Summary", "summary"},
      {"Last Iteration", "iteration"},
      {"Latest Task", "last task"},
      {"Human Feedback", "human feedback"},
  };
  std::map<std::string, std::string> out;
  for (std::string_view line : split_lines(probe_input)) {
    for (const auto& [label, key] : kLabels) {
      if (auto rest = detail::match_label(line, label)) out[key] = std::string(*rest);
    }
  }
  return out;
}

CursorProbe check_probe_cursor(std::string_view probe_input, std::string_view probe_output, int stage_count) {
  auto values = probe_values(probe_input);
  if (!values.count("iteration")) throw Error(ErrorCode::InvalidArgument, "probe input has no Last Iteration line");
  const StageCursor last = parse_cursor(values["iteration"]);
  AdvanceResult next = advance_cursor(last, Feedback(values["human feedback"]), stage_count);
  const auto* expected = std::get_if<StageCursor>(&next);
  if (expected == nullptr) throw Error(ErrorCode::InvalidArgument, "probe input completes the campaign");
  CursorProbe out{*expected, std::nullopt, {}};
  try {
    out.actual = parse_navigator_output(probe_output).cursor();
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace labloop
