#include "labloop/gateway.hpp"

#include <httplib.h>

#include "labloop/corpus.hpp"
#include "labloop/reports.hpp"
#include "labloop/rubric.hpp"
#include "labloop/scope.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

json body_of(const httplib::Request& req) {
  if (trim(req.body).empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  return j;
}

// Errors that mean the model's reply was unusable rather than the request.
bool is_model_output_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingSection:
    case ErrorCode::DuplicateSection:
    case ErrorCode::PlaceholderSection:
    case ErrorCode::MalformedCursor:
    case ErrorCode::MissingStageHeader:
    case ErrorCode::MissingObjective:
    case ErrorCode::MissingCompletionIndicator:
    case ErrorCode::NonContiguousStages:
    case ErrorCode::MissingStepsSection:
    case ErrorCode::MissingTemplateSection:
      return true;
    default:
      return false;
  }
}

json not_found(const std::string& what) { return {{"error", {{"code", "NotFound"}, {"detail", what}}}}; }

int required_int(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_number_integer()) {
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be an integer");
  }
  return body.at(key).get<int>();
}

RubricScore score_from_body(const json& b) {
  TaskRef ref;
  if (b.contains("task_ref") && b.at("task_ref").is_string()) {
    ref = parse_task_ref(b.at("task_ref").get<std::string>());
  } else if (b.contains("task_ref")) {
    ref = task_ref_from_json(b.at("task_ref"));
  } else {
    ref = task_ref_from_json(b);
  }
  return make_score(ref, required_int(b, "relevance"), required_int(b, "progress"), required_int(b, "helpfulness"));
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoSuchCampaign:
    case ErrorCode::UnknownTask:
      return 404;
    case ErrorCode::IllegalTransition:
    case ErrorCode::TurnInFlight:
    case ErrorCode::DuplicateScore:
    case ErrorCode::SessionClosed:
    case ErrorCode::ZeroTasks:
    case ErrorCode::MissingBlueprint:
      return 409;
    case ErrorCode::Timeout:
      return 504;
    case ErrorCode::AuthFailure:
    case ErrorCode::TransportFailure:
    case ErrorCode::NonSuccessStatus:
      return 502;
    case ErrorCode::StorageFailure:
    case ErrorCode::CorruptLog:
      return 500;
    default:
      return 400;
  }
}

json error_body(const Error& e) {
  return {{"error", {{"code", std::string(to_string(e.code()))}, {"detail", e.detail()}}}};
}

Gateway::Gateway(EventStore& store, Provider& provider, GatewayOptions options)
    : store_(store), options_(std::move(options)), orch_(store, provider, options_.templates) {}

Gateway::~Gateway() {
  stop();
  wait_idle();
  std::lock_guard lock(mu_);
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

void Gateway::claim(const std::string& campaign_id) {
  std::lock_guard lock(mu_);
  if (!busy_.insert(campaign_id).second) throw Error(ErrorCode::TurnInFlight, campaign_id);
}

void Gateway::release(const std::string& campaign_id) {
  std::lock_guard lock(mu_);
  busy_.erase(campaign_id);
}

void Gateway::require_idle(const std::string& campaign_id) {
  std::lock_guard lock(mu_);
  if (busy_.count(campaign_id) > 0) throw Error(ErrorCode::TurnInFlight, campaign_id);
}

void Gateway::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [this] { return active_workers_ == 0; });
}

json Gateway::ticket_json(const Ticket& t) const {
  return {{"ticket", t.id}, {"campaign_id", t.campaign_id}, {"kind", t.kind},
          {"status", t.status}, {"result", t.result}, {"error", t.error}};
}

json Gateway::campaign_view(const Campaign& c) const {
  json j = to_json_value(c);
  j["state_hash"] = state_hash(c);
  return j;
}

Gateway::Reply Gateway::dispatch_async(const std::string& campaign_id, const std::string& kind, bool wait,
                                       std::function<json()> work) {
  claim(campaign_id);
  if (wait) {
    try {
      json result = work();
      release(campaign_id);
      return {200, result};
    } catch (const Error& e) {
      release(campaign_id);
      return {is_model_output_error(e.code()) ? 502 : http_status_for(e.code()), error_body(e)};
    } catch (...) {
      release(campaign_id);
      throw;
    }
  }
  std::string ticket_id;
  {
    std::lock_guard lock(mu_);
    ticket_id = "t" + std::to_string(next_ticket_++);
    tickets_[ticket_id] = Ticket{ticket_id, campaign_id, kind, "pending", nullptr, nullptr};
    ++active_workers_;
    workers_.emplace_back([this, ticket_id, campaign_id, work = std::move(work)] {
      json result;
      json error;
      try {
        result = work();
      } catch (const Error& e) {
        error = error_body(e).at("error");
      } catch (const std::exception& e) {
        error = {{"code", "Internal"}, {"detail", e.what()}};
      }
      std::lock_guard lock(mu_);
      Ticket& t = tickets_.at(ticket_id);
      t.status = error.is_null() ? "done" : "failed";
      t.result = std::move(result);
      t.error = std::move(error);
      busy_.erase(campaign_id);
      --active_workers_;
      idle_cv_.notify_all();
    });
  }
  std::lock_guard lock(mu_);
  return {202, ticket_json(tickets_.at(ticket_id))};
}

void Gateway::install(httplib::Server& server) {
  using httplib::Request;
  using httplib::Response;
  auto route = [this](std::function<Reply(const Request&)> fn) {
    return [fn = std::move(fn)](const Request& req, Response& res) {
      Reply r;
      try {
        r = fn(req);
      } catch (const Error& e) {
        r = {http_status_for(e.code()), error_body(e)};
      } catch (const json::exception& e) {
        r = {400, {{"error", {{"code", "InvalidArgument"}, {"detail", e.what()}}}}};
      } catch (const std::exception& e) {
        r = {500, {{"error", {{"code", "Internal"}, {"detail", e.what()}}}}};
      }
      res.status = r.status;
      res.set_content(r.body.dump(), "application/json");
    };
  };
  auto wants_wait = [](const Request& req) {
    const std::string w = req.get_param_value("wait");
    return w == "1" || w == "true";
  };
  constexpr const char* kId = "([A-Za-z0-9_-]{1,64})";
  const std::string campaign = std::string("/campaigns/") + kId;

  server.Post("/campaigns", route([this](const Request& req) -> Reply {
    json b = body_of(req);
    NewCampaign spec;
    spec.subject = b.value("subject", std::string{});
    if (trim(spec.subject).empty()) throw Error(ErrorCode::InvalidArgument, "subject is required");
    spec.stage_count = b.value("stage_count", 5);
    if (spec.stage_count < 1) throw Error(ErrorCode::InvalidArgument, "stage_count must be >= 1");
    if (b.contains("id")) spec.id = b.at("id").get<std::string>();
    if (b.contains("exemplar_campaign")) {
      Campaign ex = store_.snapshot(b.at("exemplar_campaign").get<std::string>());
      if (ex.status != CampaignStatus::Complete) throw Error(ErrorCode::IllegalTransition, "exemplar campaign is not complete");
      spec.exemplar_subject = ex.subject;
      spec.exemplar_summary = ex.rolling_summary;
    }
    if (b.contains("exemplar_subject")) spec.exemplar_subject = b.at("exemplar_subject").get<std::string>();
    if (b.contains("exemplar_summary")) spec.exemplar_summary = b.at("exemplar_summary").get<std::string>();
    return {201, campaign_view(orch_.create_campaign(spec))};
  }));

  server.Get("/campaigns", route([this](const Request&) -> Reply {
    json out = json::array();
    for (const auto& id : store_.list()) {
      Campaign c = store_.snapshot(id);
      out.push_back({{"id", c.id}, {"subject", c.subject}, {"status", to_string(c.status)},
                     {"cursor", format_cursor(c.cursor)}, {"turns", c.accepted_turns().size()}});
    }
    return {200, out};
  }));

  server.Get(campaign, route([this](const Request& req) -> Reply {
    return {200, campaign_view(store_.snapshot(req.matches[1]))};
  }));

  server.Post(campaign + "/blueprint", route([this, wants_wait](const Request& req) -> Reply {
    const std::string id = req.matches[1];
    json b = body_of(req);
    store_.snapshot(id);  // 404 before anything else
    if (b.contains("blueprint") || b.contains("text")) {
      require_idle(id);
      Blueprint bp = b.contains("blueprint") ? blueprint_from_json(b.at("blueprint"))
                                             : parse_scope_output(b.at("text").get<std::string>());
      return {200, campaign_view(orch_.set_blueprint(id, bp))};
    }
    ScopeRequest scope = scope_request_from_json(b);
    return dispatch_async(id, "scope", wants_wait(req),
                          [this, id, scope] { return to_json_value(orch_.run_scope(id, scope)); });
  }));

  server.Post(campaign + "/turns", route([this, wants_wait](const Request& req) -> Reply {
    const std::string id = req.matches[1];
    Campaign c = store_.snapshot(id);
    if (c.status != CampaignStatus::Active) {
      throw Error(ErrorCode::IllegalTransition, "campaign is " + std::string(to_string(c.status)));
    }
    return dispatch_async(id, "turn", wants_wait(req), [this, id] { return to_json_value(orch_.run_turn(id)); });
  }));

  server.Get(R"(/turns/(t[0-9]+))", route([this](const Request& req) -> Reply {
    std::lock_guard lock(mu_);
    auto it = tickets_.find(req.matches[1]);
    if (it == tickets_.end()) return {404, not_found("no ticket " + std::string(req.matches[1]))};
    return {200, ticket_json(it->second)};
  }));

  server.Get(campaign + "/turns/current", route([this](const Request& req) -> Reply {
    Campaign c = store_.snapshot(req.matches[1]);
    const NavigatorTurn* t = c.current_turn();
    if (t == nullptr) return {404, not_found("no navigator turn yet")};
    json j = to_json_value(*t);
    j["campaign_status"] = to_string(c.status);
    j["campaign_cursor"] = format_cursor(c.cursor);
    return {200, j};
  }));

  server.Post(campaign + "/choice", route([this](const Request& req) -> Reply {
    const std::string id = req.matches[1];
    const int index = required_int(body_of(req), "index");
    require_idle(id);
    Campaign c = orch_.select_task(id, index);
    return {200, to_json_value(*c.current_turn())};
  }));

  server.Post(campaign + "/brief", route([this, wants_wait](const Request& req) -> Reply {
    const std::string id = req.matches[1];
    Campaign c = store_.snapshot(id);
    const NavigatorTurn* t = c.current_turn();
    if (t == nullptr || !t->selected) throw Error(ErrorCode::IllegalTransition, "brief needs a selected task");
    return dispatch_async(id, "brief", wants_wait(req), [this, id] { return to_json_value(orch_.run_brief(id)); });
  }));

  server.Post(campaign + "/feedback", route([this](const Request& req) -> Reply {
    const std::string id = req.matches[1];
    json b = body_of(req);
    if (!b.contains("text") || !b.at("text").is_string()) throw Error(ErrorCode::InvalidArgument, "text is required");
    require_idle(id);
    FeedbackOutcome out = orch_.record_feedback(id, b.at("text").get<std::string>());
    const auto* to = std::get_if<StageCursor>(&out.next);
    return {200,
            {{"status", to_string(out.campaign.status)},
             {"cursor", format_cursor(out.campaign.cursor)},
             {"completed", to == nullptr},
             {"sentinel", out.campaign.turns.back().feedback->sentinel()}}};
  }));

  server.Get(campaign + "/events", route([this](const Request& req) -> Reply {
    std::int64_t from = 1;
    if (req.has_param("from")) {
      try {
        from = std::stoll(req.get_param_value("from"));
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "from must be an integer");
      }
    }
    json out = json::array();
    for (const auto& e : store_.events(req.matches[1], from)) out.push_back(to_json_value(e));
    return {200, out};
  }));

  server.Post("/scores", route([this](const Request& req) -> Reply {
    json b = body_of(req);
    std::vector<json> items;
    if (b.contains("scores")) {
      for (const auto& s : b.at("scores")) items.push_back(s);
    } else {
      items.push_back(b);
    }
    json recorded = json::array();
    for (const auto& item : items) {
      RubricScore s = score_from_body(item);
      require_idle(s.task_ref.campaign_id);
      orch_.score_task(s.task_ref, s.relevance, s.progress, s.helpfulness, item.value("overwrite", false));
      recorded.push_back(to_json_value(s));
    }
    return {201, {{"recorded", recorded}}};
  }));

  server.Get("/reports/rubric", route([this](const Request& req) -> Reply {
    const std::string id = req.get_param_value("campaign");
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "campaign query parameter is required");
    RubricReport report = campaign_rubric(store_.snapshot(id));
    json j = {{"campaign", id}, {"report", to_json_value(report)}, {"published", nullptr},
              {"discrepancies", json::array()}};
    if (!options_.corpus_dir.empty()) {
      if (auto pub = published_rubric_for(options_.corpus_dir, id)) {
        j["published"] = {{"task_count", pub->task_count}, {"total_sum", pub->total_sum},
                          {"total_percent", format_tenths(pub->total_tenths)}};
        for (const auto& d : compare_with_published(report, *pub)) j["discrepancies"].push_back(to_json_value(d));
      }
    }
    j["table"] = format_rubric_table(report, options_.corpus_dir.empty()
                                                 ? std::nullopt
                                                 : published_rubric_for(options_.corpus_dir, id));
    return {200, j};
  }));

  server.Get("/reports/iterations", route([this](const Request& req) -> Reply {
    std::vector<CampaignIterations> rows;
    if (req.get_param_value("source") == "corpus") {
      if (options_.corpus_dir.empty()) return {404, not_found("no corpus configured")};
      for (const auto& c : verify_corpus(Corpus::load(options_.corpus_dir)).campaigns) rows.push_back({c.key, c.stats});
    } else {
      const std::string only = req.get_param_value("campaign");
      for (const auto& id : only.empty() ? store_.list() : std::vector<std::string>{only}) {
        rows.push_back({id, campaign_iterations(store_.snapshot(id))});
      }
    }
    return {200, {{"campaigns", to_json_value(rows)}, {"table", format_iteration_table(rows)}}};
  }));

  server.Get("/screening/summary", route([this](const Request&) -> Reply {
    if (options_.corpus_dir.empty()) return {404, not_found("no corpus configured")};
    return {200, to_json_value(screening_report(options_.corpus_dir))};
  }));
}

int Gateway::start(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install(*server_);
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Gateway::serve(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  install(*server_);
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorCode::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
  }
  server_->listen_after_bind();
}

void Gateway::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace labloop
