#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "labloop/error.hpp"
#include "labloop/store.hpp"
#include "labloop/workflow.hpp"

namespace httplib {
class Server;
}

namespace labloop {

struct GatewayOptions {
  std::string corpus_dir;  // for screening and published-rubric reports; may be empty
  PhaseTemplates templates;
};

// HTTP status for a module error.
int http_status_for(ErrorCode code);
json error_body(const Error& e);

// JSON API over one store and provider. Provider-backed mutations (scope,
// turn, brief) return 202 with a ticket polled at GET /turns/{ticket}, or
// run inline with ?wait=1. At most one provider call per campaign is in
// flight; any mutation of that campaign meanwhile gets 409. GETs never
// append events.
class Gateway {
 public:
  Gateway(EventStore& store, Provider& provider, GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void install(httplib::Server& server);

  // Binds (port 0 picks a free one) and serves on a background thread.
  // Returns the bound port. Throws InvalidArgument when binding fails.
  int start(const std::string& host, int port);
  // Binds and serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

  // Blocks until every background provider call has finished.
  void wait_idle();

  struct Ticket {
    std::string id;
    std::string campaign_id;
    std::string kind;  // "scope" | "turn" | "brief"
    std::string status = "pending";  // "pending" | "done" | "failed"
    json result;
    json error;
  };

 private:
  struct Reply {
    int status = 200;
    json body;
  };

  Reply dispatch_async(const std::string& campaign_id, const std::string& kind, bool wait,
                       std::function<json()> work);
  void claim(const std::string& campaign_id);
  void release(const std::string& campaign_id);
  void require_idle(const std::string& campaign_id);
  json ticket_json(const Ticket& t) const;
  json campaign_view(const Campaign& c) const;

  EventStore& store_;
  GatewayOptions options_;
  Orchestrator orch_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;

  std::mutex mu_;
  std::condition_variable idle_cv_;
  std::set<std::string> busy_;
  std::map<std::string, Ticket> tickets_;
  std::vector<std::thread> workers_;
  int active_workers_ = 0;
  int next_ticket_ = 1;
};

}  // namespace labloop
