#include "labloop/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "labloop/corpus.hpp"
#include "labloop/error.hpp"
#include "labloop/gateway.hpp"
#include "labloop/refinery.hpp"
#include "labloop/reports.hpp"
#include "labloop/rubric.hpp"
#include "labloop/scope.hpp"
#include "labloop/text.hpp"
#include "labloop/workflow.hpp"

namespace labloop {

namespace {

// Provider for commands that never call a model; fails loudly if one does.
class UnconfiguredProvider : public Provider {
 public:
  std::string chat(const std::string&) override {
    throw Error(ErrorCode::InvalidArgument, "no provider configured; pass --endpoint and --model, or --script");
  }
};

struct Options {
  std::string data_dir;
  std::string corpus_dir = LABLOOP_DEFAULT_CORPUS_DIR;
  std::string endpoint;
  std::string model;
  std::string credential_env = "LABLOOP_API_KEY";
  std::string script;
  std::string record;
  double temperature = -1;
  int timeout_ms = 120000;
  bool json = false;
};

class Session {
 public:
  explicit Session(const Options& o) : opts_(o) {}

  EventStore& store() {
    if (!store_) store_ = std::make_unique<EventStore>(opts_.data_dir);
    return *store_;
  }

  Provider& provider() {
    if (provider_) return *provider_;
    if (!opts_.script.empty()) {
      base_ = std::make_unique<ScriptedProvider>(load_transcript(opts_.script));
    } else if (!opts_.endpoint.empty()) {
      if (opts_.model.empty()) throw Error(ErrorCode::InvalidArgument, "--model is required with --endpoint");
      ProviderConfig cfg;
      cfg.endpoint_url = opts_.endpoint;
      cfg.model_name = opts_.model;
      cfg.credential_env_var = opts_.credential_env;
      cfg.timeout = std::chrono::milliseconds(opts_.timeout_ms);
      if (opts_.temperature >= 0) cfg.temperature = opts_.temperature;
      base_ = std::make_unique<HttpProvider>(cfg);
    } else {
      base_ = std::make_unique<UnconfiguredProvider>();
    }
    provider_ = base_.get();
    if (!opts_.record.empty()) {
      ProviderConfig cfg;
      cfg.credential_env_var = opts_.credential_env;
      recorder_ = std::make_unique<RecordingProvider>(*base_, opts_.record, std::vector<std::string>{credential_value(cfg)});
      provider_ = recorder_.get();
    }
    return *provider_;
  }

  Orchestrator& orch() {
    if (!orch_) orch_ = std::make_unique<Orchestrator>(store(), provider());
    return *orch_;
  }

 private:
  const Options& opts_;
  std::unique_ptr<EventStore> store_;
  std::unique_ptr<Provider> base_;
  std::unique_ptr<RecordingProvider> recorder_;
  Provider* provider_ = nullptr;
  std::unique_ptr<Orchestrator> orch_;
};

std::string read_input(const std::string& source, std::istream& in) {
  if (source == "-") {
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  return read_file(source);
}

void print_blueprint(std::ostream& out, const Blueprint& bp) {
  for (const auto& s : bp.stages()) {
    out << "Stage " << s.index << ": " << s.title << "\n";
    out << "  Objective: " << s.objective << "\n";
    if (!s.completion_indicator.empty()) out << "  Completion Indicator: " << s.completion_indicator << "\n";
  }
}

void print_turn(std::ostream& out, const NavigatorTurn& t) {
  out << "Turn " << format_cursor(t.cursor);
  if (t.output.cursor() != t.cursor) out << " (model wrote " << format_cursor(t.output.cursor()) << ")";
  out << "\n\nStatus Evaluation: " << t.output.evaluation() << "\n";
  for (const auto& c : t.output.choices()) {
    out << "\n[" << c.index << "]" << (t.selected == c.index ? " (selected)" : "") << " " << c.text << "\n";
    out << "    " << c.sentence_count << " sentences\n";
  }
  if (!t.lints.empty()) {
    out << "\nLints:\n";
    for (const auto& l : t.lints) {
      out << "  " << to_string(l.kind);
      if (l.choice > 0) out << " (choice " << l.choice << ")";
      out << ": " << l.detail << "\n";
    }
  }
}

void print_brief(std::ostream& out, const ExecutorBrief& b) {
  out << b.consolidated_summary << "\n\nSteps:\n";
  for (const auto& s : b.steps) out << s << "\n";
  out << "\nReport template:\n" << b.report_template << "\n";
  if (!b.slots.empty()) out << "\nSlots: " << join(b.slots, " | ") << "\n";
}

json campaign_json(const Campaign& c) {
  json j = to_json_value(c);
  j["state_hash"] = state_hash(c);
  return j;
}

int campaign_show(std::ostream& out, const Campaign& c) {
  out << "id:      " << c.id << "\n"
      << "subject: " << c.subject << "\n"
      << "status:  " << to_string(c.status) << "\n"
      << "cursor:  " << format_cursor(c.cursor) << "\n"
      << "turns:   " << c.accepted_turns().size() << " (" << c.failed_turns.size() << " failed)\n"
      << "scores:  " << c.scores.size() << "\n";
  if (c.exemplar_subject) out << "exemplar: " << *c.exemplar_subject << "\n";
  if (c.blueprint) {
    out << "\n";
    print_blueprint(out, *c.blueprint);
  }
  return 0;
}

void emit(std::ostream& out, bool as_json, const json& j, const std::function<void()>& text) {
  if (as_json) {
    out << j.dump(2) << "\n";
  } else {
    text();
  }
}

// Refinement REPL over `in`. One command per line.
int refine_repl(Session& session, const Options& opts, std::istream& in, std::ostream& out) {
  Refinery refinery(opts.data_dir);
  std::string current;
  ExpectedOutput expected{"", MatchMode::Line};
  const char* kHelp =
      "commands:\n"
      "  open <template-name> <goal-file> [round-cap]\n"
      "  use <session-id> | sessions | show\n"
      "  compose                      draft a candidate with the writer\n"
      "  expect <text>                pattern the probe output must contain\n"
      "  mode line|substring\n"
      "  probe <input-file>           run the candidate on a fresh probe call\n"
      "  revise <note | @file>        reject with a revision note\n"
      "  accept                       accept and export the candidate\n"
      "  quit\n";
  auto need_session = [&] {
    if (current.empty()) throw Error(ErrorCode::InvalidArgument, "no session; use open or use");
  };
  auto status_line = [&](const RefinementSession& s) {
    out << "session " << s.id << " [" << to_string(s.status) << "] rounds " << s.rounds.size() << "\n";
  };
  int failures = 0;
  out << "refine> " << std::flush;
  for (std::string line; std::getline(in, line); out << "refine> " << std::flush) {
    std::istringstream words{std::string(trim(line))};
    std::string cmd;
    words >> cmd;
    if (cmd.empty() || cmd[0] == '#') continue;
    std::string rest;
    std::getline(words, rest);
    rest = std::string(trim(rest));
    try {
      if (cmd == "quit" || cmd == "exit") {
        break;
      } else if (cmd == "help") {
        out << kHelp;
      } else if (cmd == "open") {
        std::istringstream args(rest);
        std::string name, goal_file;
        int cap = 0;
        args >> name >> goal_file;
        if (name.empty() || goal_file.empty()) throw Error(ErrorCode::InvalidArgument, "open <template-name> <goal-file> [round-cap]");
        args >> cap;
        auto s = refinery.open_session(name, read_file(goal_file), cap);
        current = s.id;
        status_line(s);
      } else if (cmd == "use") {
        current = refinery.load(rest).id;
        status_line(refinery.load(current));
      } else if (cmd == "sessions") {
        for (const auto& id : refinery.list()) status_line(refinery.load(id));
      } else if (cmd == "show") {
        need_session();
        out << to_json_value(refinery.load(current)).dump(2) << "\n";
      } else if (cmd == "compose") {
        need_session();
        auto s = refinery.compose_candidate(current, session.provider());
        out << s.rounds.back().candidate << "\n";
        status_line(s);
      } else if (cmd == "expect") {
        expected.pattern = rest;
        out << "expecting " << (expected.mode == MatchMode::Line ? "line" : "substring") << ": " << rest << "\n";
      } else if (cmd == "mode") {
        if (rest != "line" && rest != "substring") throw Error(ErrorCode::InvalidArgument, "mode line|substring");
        expected.mode = rest == "line" ? MatchMode::Line : MatchMode::Substring;
      } else if (cmd == "probe") {
        need_session();
        if (expected.pattern.empty()) throw Error(ErrorCode::InvalidArgument, "set a pattern with expect first");
        const std::string input = read_file(rest);
        auto s = refinery.probe_candidate(current, input, expected, session.provider());
        const auto& r = s.rounds.back();
        out << *r.probe_output << "\n";
        out << "expected: " << expected.pattern << "\nmatch: " << (*r.matched ? "yes" : "no") << "\n";
        if (probe_values(input).count("iteration") > 0) {
          auto c = check_probe_cursor(input, *r.probe_output);
          out << "cursor check: expected " << format_cursor(c.expected) << ", got "
              << (c.actual ? format_cursor(*c.actual) : "unparseable (" + c.error + ")") << " -> "
              << (c.passed() ? "pass" : "FAIL") << "\n";
        }
      } else if (cmd == "revise") {
        need_session();
        std::string note = rest.size() > 1 && rest[0] == '@' ? read_file(rest.substr(1)) : rest;
        status_line(refinery.record_verdict(current, Verdict::revise(std::string(trim(note)))));
      } else if (cmd == "accept") {
        need_session();
        auto s = refinery.record_verdict(current, Verdict::accepted());
        status_line(s);
        if (s.exported_path) out << "exported " << *s.exported_path << "\n";
      } else {
        throw Error(ErrorCode::InvalidArgument, "unknown command " + cmd + " (try help)");
      }
    } catch (const Error& e) {
      ++failures;
      out << "error: " << e.what() << "\n";
    }
  }
  out << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Options opts;
  if (const char* d = std::getenv("LABLOOP_DATA_DIR"); d != nullptr && *d != '\0') {
    opts.data_dir = d;
  } else {
    opts.data_dir = "labloop-data";
  }

  CLI::App app{"Event-sourced orchestrator for human-in-the-loop research campaigns", "labloop"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--data-dir", opts.data_dir, "Event log directory (env LABLOOP_DATA_DIR)");
  app.add_option("--corpus", opts.corpus_dir, "Bundled transcript corpus directory");
  app.add_option("--endpoint", opts.endpoint, "Chat-completions URL");
  app.add_option("--model", opts.model, "Model name sent to the endpoint");
  app.add_option("--credential-env", opts.credential_env, "Environment variable holding the API key");
  app.add_option("--temperature", opts.temperature, "Sampling temperature (omitted when negative)");
  app.add_option("--timeout-ms", opts.timeout_ms, "Per-request timeout")->check(CLI::PositiveNumber);
  app.add_option("--script", opts.script, "Replay provider replies from a transcript file")->check(CLI::ExistingFile);
  app.add_option("--record", opts.record, "Append every provider exchange to a transcript file");
  app.add_flag("--json", opts.json, "Machine-readable output");

  Session session(opts);
  std::function<int()> action;
  auto on = [&action](CLI::App* sub, std::function<int()> fn) { sub->callback([&action, fn] { action = fn; }); };

  // campaign
  auto* campaign = app.add_subcommand("campaign", "Create and inspect campaigns");
  campaign->require_subcommand(1);
  NewCampaign spec;
  std::string exemplar_campaign;
  std::string id_opt;
  auto* c_new = campaign->add_subcommand("new", "Start a campaign");
  c_new->add_option("--subject", spec.subject, "Linker name substituted into every prompt")->required();
  c_new->add_option("--stage-count", spec.stage_count, "Number of stages")->check(CLI::PositiveNumber);
  c_new->add_option("--id", id_opt, "Campaign id (generated when omitted)");
  c_new->add_option("--exemplar-campaign", exemplar_campaign, "Completed campaign whose final summary is shared");
  on(c_new, [&] {
    if (!id_opt.empty()) spec.id = id_opt;
    if (!exemplar_campaign.empty()) {
      Campaign ex = session.store().snapshot(exemplar_campaign);
      if (ex.status != CampaignStatus::Complete) throw Error(ErrorCode::IllegalTransition, "exemplar campaign is not complete");
      spec.exemplar_subject = ex.subject;
      spec.exemplar_summary = ex.rolling_summary;
    }
    Campaign c = session.orch().create_campaign(spec);
    emit(out, opts.json, campaign_json(c), [&] { out << c.id << "\n"; });
    return 0;
  });
  auto* c_list = campaign->add_subcommand("list", "List campaigns");
  on(c_list, [&] {
    json rows = json::array();
    for (const auto& id : session.store().list()) {
      Campaign c = session.store().snapshot(id);
      rows.push_back({{"id", c.id}, {"status", to_string(c.status)}, {"cursor", format_cursor(c.cursor)},
                      {"turns", c.accepted_turns().size()}, {"subject", c.subject}});
    }
    emit(out, opts.json, rows, [&] {
      for (const auto& r : rows) {
        out << r["id"].get<std::string>() << "\t" << r["status"].get<std::string>() << "\t"
            << r["cursor"].get<std::string>() << "\t" << r["turns"].get<int>() << "\t" << r["subject"].get<std::string>()
            << "\n";
      }
    });
    return 0;
  });
  std::string show_id;
  auto* c_show = campaign->add_subcommand("show", "Show one campaign");
  c_show->add_option("id", show_id, "Campaign id")->required();
  on(c_show, [&] {
    Campaign c = session.store().snapshot(show_id);
    emit(out, opts.json, campaign_json(c), [&] { campaign_show(out, c); });
    return 0;
  });
  std::string scope_id, scope_request;
  auto* c_scope = campaign->add_subcommand("scope", "Run the scoping phase and install the proposed plan");
  c_scope->add_option("id", scope_id, "Campaign id")->required();
  c_scope->add_option("--request", scope_request, "Scope request JSON")->required()->check(CLI::ExistingFile);
  on(c_scope, [&] {
    Blueprint bp = session.orch().run_scope(scope_id, scope_request_from_json(json::parse(read_file(scope_request))));
    emit(out, opts.json, to_json_value(bp), [&] { print_blueprint(out, bp); });
    return 0;
  });
  std::string bp_id, bp_file;
  auto* c_bp = campaign->add_subcommand("blueprint", "Install a human-refined plan (text or JSON)");
  c_bp->add_option("id", bp_id, "Campaign id")->required();
  c_bp->add_option("--file", bp_file, "Plan file, '-' for stdin")->required();
  on(c_bp, [&] {
    const std::string text = read_input(bp_file, in);
    json j = json::parse(text, nullptr, false);
    Blueprint bp = !j.is_discarded() && j.is_object()
                       ? blueprint_from_json(j.contains("blueprint") ? j.at("blueprint") : j)
                       : parse_scope_output(text);
    Campaign c = session.orch().set_blueprint(bp_id, bp);
    emit(out, opts.json, campaign_json(c), [&] { print_blueprint(out, bp); });
    return 0;
  });

  // turn
  std::string campaign_id;
  auto* turn = app.add_subcommand("turn", "Navigator turns");
  turn->require_subcommand(1);
  auto* t_run = turn->add_subcommand("run", "Run one navigator turn");
  t_run->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(t_run, [&] {
    NavigatorTurn t = session.orch().run_turn(campaign_id);
    emit(out, opts.json, to_json_value(t), [&] { print_turn(out, t); });
    return 0;
  });
  auto* t_show = turn->add_subcommand("show", "Show the current turn");
  t_show->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(t_show, [&] {
    Campaign c = session.store().snapshot(campaign_id);
    const NavigatorTurn* t = c.current_turn();
    if (t == nullptr) throw Error(ErrorCode::IllegalTransition, "no navigator turn yet");
    emit(out, opts.json, to_json_value(*t), [&] { print_turn(out, *t); });
    return 0;
  });

  // choose
  int choice = 0;
  auto* choose = app.add_subcommand("choose", "Select a task choice of the current turn");
  choose->add_option("index", choice, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  choose->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(choose, [&] {
    Campaign c = session.orch().select_task(campaign_id, choice);
    emit(out, opts.json, to_json_value(*c.current_turn()),
         [&] { out << "selected choice " << choice << " of turn " << format_cursor(c.current_turn()->cursor) << "\n"; });
    return 0;
  });

  // feedback
  std::string feedback_src;
  auto* feedback = app.add_subcommand("feedback", "Record feedback for the current turn and move the cursor");
  feedback->add_option("source", feedback_src, "File with the feedback text, or '-' for stdin")->required();
  feedback->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(feedback, [&] {
    const std::string text(trim(read_input(feedback_src, in)));
    const StageCursor from = session.store().snapshot(campaign_id).cursor;
    FeedbackOutcome r = session.orch().record_feedback(campaign_id, text);
    const auto* to = std::get_if<StageCursor>(&r.next);
    json j = {{"from", format_cursor(from)},
              {"cursor", format_cursor(r.campaign.cursor)},
              {"status", to_string(r.campaign.status)},
              {"completed", to == nullptr}};
    emit(out, opts.json, j, [&] {
      if (to == nullptr) {
        out << format_cursor(from) << " -> campaign complete\n";
      } else {
        out << format_cursor(from) << " -> " << format_cursor(*to) << "\n";
      }
    });
    return 0;
  });

  // brief
  auto* brief = app.add_subcommand("brief", "Run the executor for the selected task");
  brief->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(brief, [&] {
    ExecutorBrief b = session.orch().run_brief(campaign_id);
    emit(out, opts.json, to_json_value(b), [&] { print_brief(out, b); });
    return 0;
  });

  // score
  std::string score_cursor, score_import;
  int score_choice = 0, relevance = 0, progress = 0, helpfulness = 0;
  bool overwrite = false;
  auto* score = app.add_subcommand("score", "Record rubric scores");
  score->add_option("--campaign", campaign_id, "Campaign id");
  score->add_option("--cursor", score_cursor, "Turn cursor, e.g. 2-3");
  score->add_option("--choice", score_choice, "Task choice")->check(CLI::Range(1, 3));
  score->add_option("--relevance", relevance)->check(CLI::Range(0, 1));
  score->add_option("--progress", progress)->check(CLI::Range(0, 1));
  score->add_option("--helpfulness", helpfulness)->check(CLI::Range(0, 1));
  score->add_flag("--overwrite", overwrite, "Replace an existing score");
  score->add_option("--import", score_import, "Score CSV to load")->check(CLI::ExistingFile);
  on(score, [&] {
    std::vector<RubricScore> scores;
    if (!score_import.empty()) {
      scores = import_scores_csv(read_file(score_import));
      if (!campaign_id.empty()) {
        for (auto& s : scores) s.task_ref.campaign_id = campaign_id;
      }
    } else {
      if (campaign_id.empty() || score_cursor.empty() || score_choice == 0) {
        throw Error(ErrorCode::InvalidArgument, "score needs --campaign, --cursor and --choice, or --import");
      }
      scores.push_back(make_score({campaign_id, parse_cursor(score_cursor), score_choice}, relevance, progress, helpfulness));
    }
    for (const auto& s : scores) {
      session.orch().score_task(s.task_ref, s.relevance, s.progress, s.helpfulness, overwrite);
    }
    emit(out, opts.json, {{"recorded", scores.size()}}, [&] { out << "recorded " << scores.size() << " score(s)\n"; });
    return 0;
  });

  // report
  auto* report = app.add_subcommand("report", "Rubric, iteration and screening reports");
  report->require_subcommand(1);
  std::string report_campaign, report_scores;
  auto* r_rubric = report->add_subcommand("rubric", "Rubric table for one campaign");
  r_rubric->add_option("--campaign", report_campaign, "Campaign id, or a corpus campaign key")->required();
  r_rubric->add_option("--scores", report_scores, "Score CSV (corpus campaigns only)")->check(CLI::ExistingFile);
  on(r_rubric, [&] {
    RubricReport rep;
    // Reading a corpus table must not create an empty data directory.
    if (std::filesystem::exists(opts.data_dir) && session.store().exists(report_campaign)) {
      rep = campaign_rubric(session.store().snapshot(report_campaign));
    } else {
      // Not a live campaign: score the bundled transcript of that name.
      const Corpus corpus = Corpus::load(opts.corpus_dir);
      const auto& cc = corpus.campaign(report_campaign);
      const std::string scores_path =
          report_scores.empty() ? corpus.path("rubric/" + to_lower_ascii(report_campaign) + "_scores.csv") : report_scores;
      rep = aggregate(import_scores_csv(read_file(scores_path)), static_cast<int>(cc.turns.size()) * 3);
    }
    auto published = published_rubric_for(opts.corpus_dir, report_campaign);
    json j = {{"campaign", report_campaign}, {"report", to_json_value(rep)}, {"discrepancies", json::array()}};
    if (published) {
      for (const auto& d : compare_with_published(rep, *published)) j["discrepancies"].push_back(to_json_value(d));
    }
    emit(out, opts.json, j, [&] { out << format_rubric_table(rep, published); });
    return 0;
  });
  bool corpus_stats = false;
  auto* r_iter = report->add_subcommand("iterations", "Per-stage iteration counts");
  r_iter->add_option("--campaign", report_campaign, "Only this campaign");
  r_iter->add_flag("--corpus-stats", corpus_stats, "Use the bundled transcript corpus instead of the data directory");
  on(r_iter, [&] {
    std::vector<CampaignIterations> rows;
    if (corpus_stats) {
      for (const auto& c : verify_corpus(Corpus::load(opts.corpus_dir)).campaigns) rows.push_back({c.key, c.stats});
    } else {
      auto ids = report_campaign.empty() ? session.store().list() : std::vector<std::string>{report_campaign};
      for (const auto& id : ids) rows.push_back({id, campaign_iterations(session.store().snapshot(id))});
    }
    emit(out, opts.json, to_json_value(rows), [&] { out << format_iteration_table(rows); });
    return 0;
  });
  auto* r_screen = report->add_subcommand("screening", "Summary of the bundled screening tables");
  on(r_screen, [&] {
    ScreeningReport rep = screening_report(opts.corpus_dir);
    emit(out, opts.json, to_json_value(rep), [&] { out << format_screening_report(rep); });
    return 0;
  });

  // replay
  auto* replay = app.add_subcommand("replay", "Fold a campaign log from disk and compare with the live state");
  replay->add_option("--campaign", campaign_id, "Campaign id")->required();
  on(replay, [&] {
    const std::size_t events = session.store().events(campaign_id).size();
    Campaign replayed = session.store().replay(campaign_id);
    const std::string live = state_hash(session.store().snapshot(campaign_id));
    const std::string folded = state_hash(replayed);
    json j = {{"campaign", campaign_id}, {"events", events}, {"status", to_string(replayed.status)},
              {"live_hash", live}, {"replay_hash", folded}, {"match", live == folded}};
    emit(out, opts.json, j, [&] {
      out << campaign_id << ": " << events << " events, " << to_string(replayed.status) << ", cursor "
          << format_cursor(replayed.cursor) << "\nstate " << folded << (live == folded ? " OK" : " MISMATCH") << "\n";
    });
    return live == folded ? 0 : 1;
  });

  // refine
  auto* refine = app.add_subcommand("refine", "Interactive prompt refinement (reads commands from stdin)");
  on(refine, [&] { return refine_repl(session, opts, in, out); });

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Bundled transcript corpus");
  corpus->require_subcommand(1);
  auto* verify = corpus->add_subcommand("verify", "Replay every bundled navigator turn through the parser and advance rule");
  on(verify, [&] {
    CorpusVerification v = verify_corpus(Corpus::load(opts.corpus_dir));
    emit(out, opts.json, to_json_value(v), [&] { out << format_verification(v); });
    return v.ok() ? 0 : 1;
  });

  // serve
  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Run the HTTP JSON API");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Bind address");
  on(serve, [&] {
    Gateway gateway(session.store(), session.provider(), GatewayOptions{opts.corpus_dir, {}});
    err << "listening on http://" << host << ":" << port << "\n";
    gateway.serve(host, port);
    return 0;
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "run 'labloop " << sub->get_name() << " --help' for usage\n";
    }
    return 2;
  }
  if (!action) {
    out << app.help();
    return 2;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace labloop
