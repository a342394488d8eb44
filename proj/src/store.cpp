#include "labloop/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>

#include "labloop/error.hpp"
#include "labloop/executor.hpp"
#include "labloop/navigator.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void illegal(const Event& e, const std::string& why) {
  throw Error(ErrorCode::IllegalTransition, std::string(to_string(e.kind)) + ": " + why);
}

void require_status(const Campaign& c, const Event& e, CampaignStatus status) {
  if (c.status != status) {
    illegal(e, "campaign is " + std::string(to_string(c.status)) + ", needs " + std::string(to_string(status)));
  }
}

bool valid_campaign_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_';
  });
}

std::optional<std::string> optional_string_at(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

NavigatorTurn& turn_at_cursor(Campaign& c, const Event& e) {
  NavigatorTurn* t = c.current_turn();
  if (t == nullptr) illegal(e, "no navigator turn yet");
  if (e.payload.contains("cursor") && parse_cursor(e.payload.at("cursor").get<std::string>()) != t->cursor) {
    illegal(e, "cursor " + e.payload.at("cursor").get<std::string>() + " is not the current turn " +
                   format_cursor(t->cursor));
  }
  return *t;
}

void apply_created(Campaign& c, const Event& e) {
  if (!c.id.empty()) illegal(e, "campaign already exists");
  const json& p = e.payload;
  c.id = p.at("id").get<std::string>();
  c.subject = p.at("subject").get<std::string>();
  c.stage_count = p.value("stage_count", 5);
  if (c.stage_count < 1) throw Error(ErrorCode::InvalidArgument, "stage_count must be >= 1");
  c.exemplar_subject = optional_string_at(p, "exemplar_subject");
  c.exemplar_summary = optional_string_at(p, "exemplar_summary");
  c.status = CampaignStatus::Scoping;
}

void apply_blueprint(Campaign& c, const Event& e) {
  require_status(c, e, CampaignStatus::Scoping);
  Blueprint bp = blueprint_from_json(e.payload.at("blueprint"));
  c.stage_count = bp.size();
  c.blueprint = std::move(bp);
  c.cursor = {1, 1};
  c.status = CampaignStatus::Active;
  c.pending.reset();
}

void apply_prompt(Campaign& c, const Event& e) {
  const std::string phase = e.payload.at("phase").get<std::string>();
  PendingCall call{phase, e.payload.at("prompt").get<std::string>(), std::nullopt, 0};
  if (phase == "scope") {
    require_status(c, e, CampaignStatus::Scoping);
  } else if (phase == "navigator") {
    require_status(c, e, CampaignStatus::Active);
    if (const NavigatorTurn* t = c.current_turn(); t != nullptr && !t->advanced && t->selected) {
      illegal(e, "turn " + format_cursor(t->cursor) + " has a selected task awaiting feedback");
    }
  } else if (phase == "executor") {
    require_status(c, e, CampaignStatus::Active);
    const NavigatorTurn& t = turn_at_cursor(c, e);
    if (t.advanced || t.feedback) illegal(e, "turn " + format_cursor(t.cursor) + " already has feedback");
    if (!t.selected) illegal(e, "no task selected");
    call.choice = e.payload.at("choice").get<int>();
    if (call.choice != *t.selected) illegal(e, "brief must be for the selected task");
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown phase " + phase);
  }
  c.pending = std::move(call);  // an unanswered earlier call is abandoned
}

void apply_response(Campaign& c, const Event& e) {
  const std::string phase = e.payload.at("phase").get<std::string>();
  if (!c.pending || c.pending->phase != phase || c.pending->response) {
    illegal(e, "no outstanding " + phase + " prompt");
  }
  std::string response = e.payload.at("response").get<std::string>();
  if (phase == "scope") {
    c.scope_response = std::move(response);
    c.pending.reset();
  } else if (phase == "executor") {
    NavigatorTurn& t = *c.current_turn();
    t.brief_prompt = c.pending->prompt;
    t.brief_response = response;
    try {
      t.brief = parse_executor_output(response);
      t.brief_error.reset();
    } catch (const Error& err) {
      t.brief.reset();
      t.brief_error = err.what();
    }
    c.pending.reset();
  } else {
    c.pending->response = std::move(response);
  }
}

void apply_parsed(Campaign& c, const Event& e) {
  if (!c.pending || c.pending->phase != "navigator" || !c.pending->response) {
    illegal(e, "no navigator response to parse");
  }
  const json& p = e.payload;
  if (!p.at("ok").get<bool>()) {
    c.failed_turns.push_back({c.cursor, c.pending->prompt, *c.pending->response, p.at("error").get<std::string>()});
    c.pending.reset();
    return;
  }
  const StageCursor cursor = parse_cursor(p.at("cursor").get<std::string>());
  if (cursor != c.cursor) illegal(e, "turn cursor " + format_cursor(cursor) + " != campaign cursor " + format_cursor(c.cursor));
  NavigatorTurn turn{cursor,
                     c.pending->prompt,
                     *c.pending->response,
                     navigator_output_from_json(p.at("output")),
                     lints_from_json(p.value("lints", json::array())),
                     std::nullopt,
                     std::nullopt,
                     std::nullopt,
                     std::nullopt,
                     std::nullopt,
                     std::nullopt,
                     false,
                     false};
  if (NavigatorTurn* prev = c.current_turn(); prev != nullptr && !prev->advanced) prev->rejected = true;
  c.turns.push_back(std::move(turn));
  c.pending.reset();
}

void apply_selected(Campaign& c, const Event& e) {
  require_status(c, e, CampaignStatus::Active);
  NavigatorTurn& t = turn_at_cursor(c, e);
  if (t.advanced || t.feedback) illegal(e, "turn " + format_cursor(t.cursor) + " already has feedback");
  const int choice = e.payload.at("choice").get<int>();
  if (choice < 1 || choice > 3) throw Error(ErrorCode::InvalidChoiceIndex, std::to_string(choice));
  if (t.selected && *t.selected != choice) {
    t.brief.reset();
    t.brief_prompt.reset();
    t.brief_response.reset();
    t.brief_error.reset();
  }
  t.selected = choice;
  if (c.pending && c.pending->phase == "executor") c.pending.reset();
}

void apply_feedback(Campaign& c, const Event& e) {
  require_status(c, e, CampaignStatus::Active);
  NavigatorTurn& t = turn_at_cursor(c, e);
  if (!t.selected) illegal(e, "no task selected");
  if (t.feedback) illegal(e, "feedback already recorded for " + format_cursor(t.cursor));
  t.feedback = Feedback(e.payload.at("text").get<std::string>());
  if (c.pending && c.pending->phase == "executor") c.pending.reset();
}

void apply_advance(Campaign& c, const Event& e, bool completing) {
  require_status(c, e, CampaignStatus::Active);
  NavigatorTurn* t = c.current_turn();
  if (t == nullptr || !t->feedback || t->advanced) illegal(e, "no feedback awaiting a cursor move");
  const StageCursor from = parse_cursor(e.payload.at("from").get<std::string>());
  if (from != c.cursor) illegal(e, "from " + format_cursor(from) + " != campaign cursor " + format_cursor(c.cursor));
  AdvanceResult next = advance_cursor(c.cursor, *t->feedback, c.stage_count);
  if (completing) {
    if (!std::holds_alternative<CampaignComplete>(next)) illegal(e, "feedback does not complete the campaign");
    c.status = CampaignStatus::Complete;
  } else {
    const auto* to = std::get_if<StageCursor>(&next);
    if (to == nullptr) illegal(e, "feedback completes the campaign");
    if (parse_cursor(e.payload.at("to").get<std::string>()) != *to) {
      illegal(e, "to " + e.payload.at("to").get<std::string>() + " != advance rule " + format_cursor(*to));
    }
    c.cursor = *to;
  }
  t->advanced = true;
  c.rolling_summary = t->output.summary();
}

void apply_score(Campaign& c, const Event& e) {
  RubricScore s = rubric_score_from_json(e.payload.at("score"));
  if (s.task_ref.campaign_id != c.id) throw Error(ErrorCode::UnknownTask, format_task_ref(s.task_ref));
  const NavigatorTurn* t = c.find_turn(s.task_ref.cursor);
  if (t == nullptr || s.task_ref.choice < 1 || s.task_ref.choice > 3) {
    throw Error(ErrorCode::UnknownTask, format_task_ref(s.task_ref));
  }
  const bool overwrite = e.payload.value("overwrite", false);
  auto it = std::find_if(c.scores.begin(), c.scores.end(), [&](const RubricScore& x) { return x.task_ref == s.task_ref; });
  if (it != c.scores.end()) {
    if (!overwrite) throw Error(ErrorCode::DuplicateScore, format_task_ref(s.task_ref));
    *it = s;
  } else {
    c.scores.push_back(s);
  }
}

void apply_unchecked(Campaign& c, const Event& e) {
  if (e.kind != EventKind::CampaignCreated && c.id.empty()) illegal(e, "campaign not created");
  switch (e.kind) {
    case EventKind::CampaignCreated: return apply_created(c, e);
    case EventKind::BlueprintSet: return apply_blueprint(c, e);
    case EventKind::PromptRendered: return apply_prompt(c, e);
    case EventKind::ModelResponded: return apply_response(c, e);
    case EventKind::TurnParsed: return apply_parsed(c, e);
    case EventKind::TaskSelected: return apply_selected(c, e);
    case EventKind::FeedbackRecorded: return apply_feedback(c, e);
    case EventKind::CursorAdvanced: return apply_advance(c, e, false);
    case EventKind::CampaignCompleted: return apply_advance(c, e, true);
    case EventKind::ScoreRecorded: return apply_score(c, e);
  }
}

json header_line(const std::string& campaign_id) {
  return {{"schema", kEventLogSchema}, {"version", kEventLogVersion}, {"campaign_id", campaign_id}};
}

void append_durably(const std::string& path, const std::string& data) {
  int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::StorageFailure, path + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      int err = errno;
      ::close(fd);
      throw Error(ErrorCode::StorageFailure, path + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    int err = errno;
    ::close(fd);
    throw Error(ErrorCode::StorageFailure, path + ": fsync: " + std::strerror(err));
  }
  ::close(fd);
}

std::vector<Event> read_log(const std::string& path, const std::string& campaign_id) {
  if (!fs::exists(path)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  std::string text = read_file(path);
  auto lines = split_lines(text);
  std::vector<Event> events;
  bool header = false;
  for (std::string_view line : lines) {
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (!header) {
      if (j.is_discarded() || j.value("schema", std::string{}) != kEventLogSchema) {
        throw Error(ErrorCode::CorruptLog, "0: missing header");
      }
      if (j.value("version", 0) != kEventLogVersion) throw Error(ErrorCode::CorruptLog, "0: unsupported version");
      header = true;
      continue;
    }
    const std::int64_t expected = static_cast<std::int64_t>(events.size()) + 1;
    if (j.is_discarded()) throw Error(ErrorCode::CorruptLog, std::to_string(expected) + ": unparseable line");
    try {
      events.push_back(event_from_json(j));
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::CorruptLog, std::to_string(expected) + ": " + ex.what());
    }
  }
  if (events.empty()) throw Error(ErrorCode::NoSuchCampaign, campaign_id + " (empty log)");
  return events;
}

}  // namespace

void apply_event(Campaign& campaign, const Event& event) {
  Campaign next = campaign;
  try {
    apply_unchecked(next, event);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(event.kind)) + " payload: " + ex.what());
  }
  campaign = std::move(next);
}

Campaign fold_events(const std::vector<Event>& events) {
  Campaign c;
  std::int64_t expected = 1;
  for (const Event& e : events) {
    if (e.seq != expected) {
      throw Error(ErrorCode::CorruptLog, std::to_string(expected) + ": found seq " + std::to_string(e.seq));
    }
    if ((e.kind == EventKind::CampaignCreated) != (expected == 1)) {
      throw Error(ErrorCode::CorruptLog, std::to_string(e.seq) + ": CampaignCreated must be exactly the first event");
    }
    try {
      apply_event(c, e);
    } catch (const Error& err) {
      throw Error(ErrorCode::CorruptLog, std::to_string(e.seq) + ": " + err.what());
    }
    ++expected;
  }
  return c;
}

std::string state_hash(const Campaign& campaign) { return sha256_hex(to_json_value(campaign).dump()); }

EventStore::EventStore(std::string data_dir) : data_dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, data_dir_ + ": " + ec.message());
}

std::string EventStore::log_path(const std::string& campaign_id) const {
  return data_dir_ + "/" + campaign_id + ".events.jsonl";
}

bool EventStore::exists(const std::string& campaign_id) const {
  return valid_campaign_id(campaign_id) && fs::exists(log_path(campaign_id));
}

std::vector<std::string> EventStore::list() const {
  std::vector<std::string> ids;
  constexpr std::string_view kSuffix = ".events.jsonl";
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    std::string name = entry.path().filename().string();
    if (name.size() > kSuffix.size() && name.ends_with(kSuffix)) ids.push_back(name.substr(0, name.size() - kSuffix.size()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string EventStore::next_campaign_id() const {
  auto ids = list();
  for (int n = static_cast<int>(ids.size()) + 1;; ++n) {
    std::string id = "c" + std::to_string(n);
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) return id;
  }
}

EventStore::Slot& EventStore::slot(const std::string& campaign_id) const {
  std::lock_guard lock(slots_mu_);
  auto& s = slots_[campaign_id];
  if (!s) s = std::make_unique<Slot>();
  return *s;
}

void EventStore::load_locked(const std::string& campaign_id, Slot& s) {
  if (s.live) return;
  if (!exists(campaign_id)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  auto events = read_log(log_path(campaign_id), campaign_id);
  s.live = fold_events(events);
  s.last_seq = events.back().seq;
}

Campaign EventStore::create_campaign(const NewCampaign& spec) {
  std::string id;
  {
    // Id allocation and file creation are atomic with respect to other creators.
    std::lock_guard lock(slots_mu_);
    id = spec.id.value_or(next_campaign_id());
    if (!valid_campaign_id(id)) throw Error(ErrorCode::InvalidArgument, "campaign id must match [A-Za-z0-9_-]{1,64}");
    if (fs::exists(log_path(id))) throw Error(ErrorCode::InvalidArgument, "campaign " + id + " already exists");
    append_durably(log_path(id), header_line(id).dump() + "\n");
  }
  json payload = {{"id", id}, {"subject", spec.subject}, {"stage_count", spec.stage_count}};
  if (spec.exemplar_subject) payload["exemplar_subject"] = *spec.exemplar_subject;
  if (spec.exemplar_summary) payload["exemplar_summary"] = *spec.exemplar_summary;

  Slot& s = slot(id);
  std::lock_guard lock(s.mu);
  Event e{1, utc_timestamp(), EventKind::CampaignCreated, payload};
  Campaign c;
  apply_event(c, e);
  append_durably(log_path(id), to_json_value(e).dump() + "\n");
  s.live = c;
  s.last_seq = 1;
  return c;
}

std::int64_t EventStore::append(const std::string& campaign_id, EventKind kind, json payload) {
  if (kind == EventKind::CampaignCreated) throw Error(ErrorCode::IllegalTransition, "use create_campaign");
  if (!valid_campaign_id(campaign_id)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  Slot& s = slot(campaign_id);
  std::lock_guard lock(s.mu);
  load_locked(campaign_id, s);
  Event e{s.last_seq + 1, utc_timestamp(), kind, std::move(payload)};
  Campaign next = *s.live;
  apply_event(next, e);
  append_durably(log_path(campaign_id), to_json_value(e).dump() + "\n");
  s.live = std::move(next);
  s.last_seq = e.seq;
  return e.seq;
}

Campaign EventStore::snapshot(const std::string& campaign_id) {
  if (!valid_campaign_id(campaign_id)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  Slot& s = slot(campaign_id);
  std::lock_guard lock(s.mu);
  load_locked(campaign_id, s);
  return *s.live;
}

Campaign EventStore::replay(const std::string& campaign_id) const {
  if (!valid_campaign_id(campaign_id)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  std::vector<Event> all;
  {
    std::lock_guard lock(slot(campaign_id).mu);
    all = read_log(log_path(campaign_id), campaign_id);
  }
  return fold_events(all);
}

std::vector<Event> EventStore::events(const std::string& campaign_id, std::int64_t from_seq) const {
  if (!valid_campaign_id(campaign_id)) throw Error(ErrorCode::NoSuchCampaign, campaign_id);
  std::vector<Event> all;
  {
    std::lock_guard lock(slot(campaign_id).mu);
    all = read_log(log_path(campaign_id), campaign_id);
  }
  std::vector<Event> out;
  for (auto& e : all) {
    if (e.seq >= from_seq) out.push_back(std::move(e));
  }
  return out;
}

}  // namespace labloop
