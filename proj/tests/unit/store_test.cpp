#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "fixtures.hpp"
#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/scope.hpp"
#include "labloop/store.hpp"
#include "labloop/text.hpp"

namespace labloop {
namespace {

using testing::TempDir;

Blueprint two_stage_blueprint() {
  return Blueprint({{1, "Make the linker", "Synthesize it.", "NMR is clean."},
                    {2, "Screen conditions", "Try conditions.", "A phase forms."}});
}

// Appends a full navigator round trip for the campaign's current cursor.
void append_turn(EventStore& store, const std::string& id, StageCursor cursor) {
  const std::string reply = testing::navigator_reply(cursor);
  store.append(id, EventKind::PromptRendered, {{"phase", "navigator"}, {"prompt", "prompt " + format_cursor(cursor)}});
  store.append(id, EventKind::ModelResponded, {{"phase", "navigator"}, {"response", reply}});
  store.append(id, EventKind::TurnParsed,
               {{"ok", true},
                {"cursor", format_cursor(cursor)},
                {"output", to_json_value(parse_navigator_output(reply))},
                {"lints", json::array()}});
}

Campaign created(EventStore& store) {
  NewCampaign spec;
  spec.subject = "Aluminum MOF";
  return store.create_campaign(spec);
}

TEST(EventStore, CreateAssignsSequentialIdsAndFirstSeq) {
  TempDir dir;
  EventStore store(dir.str());
  EXPECT_EQ(created(store).id, "c1");
  EXPECT_EQ(created(store).id, "c2");
  EXPECT_EQ(store.list(), (std::vector<std::string>{"c1", "c2"}));
  auto events = store.events("c1");
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].seq, 1);
  EXPECT_EQ(store.snapshot("c1").status, CampaignStatus::Scoping);
}

TEST(EventStore, TwoAppendsGetConsecutiveSeqs) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  EXPECT_EQ(store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}}), 2);
  EXPECT_EQ(store.append(id, EventKind::PromptRendered, {{"phase", "navigator"}, {"prompt", "p"}}), 3);
}

TEST(EventStore, LogStartsWithSchemaHeader) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  std::ifstream in(store.log_path(id));
  std::string first;
  std::getline(in, first);
  json header = json::parse(first);
  EXPECT_EQ(header["schema"], "labloop.campaign-events");
  EXPECT_EQ(header["version"], 1);
  EXPECT_EQ(header["campaign_id"], id);
}

TEST(EventStore, TaskSelectedOnFreshCampaignIsIllegal) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  try {
    store.append(id, EventKind::TaskSelected, {{"cursor", "1-1"}, {"choice", 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IllegalTransition);
  }
  EXPECT_EQ(store.events(id).size(), 1u);  // nothing written
}

TEST(EventStore, TaskSelectedAfterTurnParsedIsAccepted) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
  append_turn(store, id, {1, 1});
  store.append(id, EventKind::TaskSelected, {{"cursor", "1-1"}, {"choice", 2}});
  EXPECT_EQ(store.snapshot(id).current_turn()->selected, 2);
}

TEST(EventStore, RejectsIllegalTransitionsWithoutWriting) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  auto expect_code = [&](EventKind kind, json payload, ErrorCode code) {
    const auto before = store.events(id).size();
    try {
      store.append(id, kind, std::move(payload));
      ADD_FAILURE() << to_string(kind);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
    EXPECT_EQ(store.events(id).size(), before);
  };
  expect_code(EventKind::PromptRendered, {{"phase", "navigator"}, {"prompt", "p"}}, ErrorCode::IllegalTransition);
  expect_code(EventKind::CampaignCreated, {{"id", id}, {"subject", "x"}}, ErrorCode::IllegalTransition);
  store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
  expect_code(EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}},
              ErrorCode::IllegalTransition);
  append_turn(store, id, {1, 1});
  expect_code(EventKind::FeedbackRecorded, {{"cursor", "1-1"}, {"text", "done"}}, ErrorCode::IllegalTransition);
  expect_code(EventKind::TaskSelected, {{"cursor", "1-1"}, {"choice", 4}}, ErrorCode::InvalidChoiceIndex);
  expect_code(EventKind::TaskSelected, {{"cursor", "1-2"}, {"choice", 1}}, ErrorCode::IllegalTransition);
  store.append(id, EventKind::TaskSelected, {{"cursor", "1-1"}, {"choice", 1}});
  store.append(id, EventKind::FeedbackRecorded, {{"cursor", "1-1"}, {"text", "Yield was low."}});
  // The advance must agree with the rule.
  expect_code(EventKind::CursorAdvanced, {{"from", "1-1"}, {"to", "2-1"}}, ErrorCode::IllegalTransition);
  expect_code(EventKind::CampaignCompleted, {{"from", "1-1"}}, ErrorCode::IllegalTransition);
  store.append(id, EventKind::CursorAdvanced, {{"from", "1-1"}, {"to", "1-2"}});
  expect_code(EventKind::ScoreRecorded,
              {{"score", to_json_value(make_score({id, {1, 9}, 1}, 1, 1, 1))}}, ErrorCode::UnknownTask);
  store.append(id, EventKind::ScoreRecorded, {{"score", to_json_value(make_score({id, {1, 1}, 1}, 1, 0, 1))}});
  expect_code(EventKind::ScoreRecorded, {{"score", to_json_value(make_score({id, {1, 1}, 1}, 0, 0, 0))}},
              ErrorCode::DuplicateScore);
  store.append(id, EventKind::ScoreRecorded,
               {{"score", to_json_value(make_score({id, {1, 1}, 1}, 0, 0, 0))}, {"overwrite", true}});
  EXPECT_EQ(store.snapshot(id).scores.at(0).total(), 0);
}

TEST(EventStore, MalformedPayloadIsInvalidArgument) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  try {
    store.append(id, EventKind::BlueprintSet, {{"nope", 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(EventStore, UnknownCampaign) {
  TempDir dir;
  EventStore store(dir.str());
  for (const std::string id : {"missing", "../etc", ""}) {
    try {
      store.replay(id);
      FAIL() << id;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NoSuchCampaign);
    }
  }
  EXPECT_THROW(store.snapshot("missing"), Error);
  EXPECT_THROW(store.append("missing", EventKind::BlueprintSet, {}), Error);
}

TEST(EventStore, HeaderOnlyLogIsNoSuchCampaign) {
  TempDir dir;
  write_file(dir.file("empty.events.jsonl"), R"({"schema":"labloop.campaign-events","version":1,"campaign_id":"empty"})"
                                             "\n");
  EventStore store(dir.str());
  try {
    store.replay("empty");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSuchCampaign);
  }
}

// Builds a log, then rewrites one line through `mutate`.
std::string corrupted_log(const TempDir& dir, const std::function<void(std::vector<std::string>&)>& mutate) {
  {
    EventStore store(dir.str());
    const std::string id = created(store).id;
    store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
    append_turn(store, id, {1, 1});
  }
  const std::string path = dir.file("c1.events.jsonl");
  std::vector<std::string> lines;
  const std::string text = read_file(path);
  for (auto l : split_lines(text)) {
    if (!l.empty()) lines.emplace_back(l);
  }
  mutate(lines);
  write_file(path, join(lines, "\n") + "\n");
  return "c1";
}

void expect_corrupt(const TempDir& dir, const std::string& id, const std::string& seq_prefix) {
  EventStore fresh(dir.str());
  try {
    fresh.replay(id);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CorruptLog);
    EXPECT_EQ(e.detail().rfind(seq_prefix, 0), 0u) << e.detail();
  }
}

TEST(EventStore, SeqGapIsCorruptLog) {
  TempDir dir;
  auto id = corrupted_log(dir, [](auto& lines) { lines.erase(lines.begin() + 3); });
  expect_corrupt(dir, id, "3:");
}

TEST(EventStore, GarbageLineIsCorruptLog) {
  TempDir dir;
  auto id = corrupted_log(dir, [](auto& lines) { lines[4] = "{not json"; });
  expect_corrupt(dir, id, "4:");
}

TEST(EventStore, InvalidTransitionInLogIsCorruptLog) {
  TempDir dir;
  auto id = corrupted_log(dir, [](auto& lines) {
    json e = json::parse(lines[2]);
    e["kind"] = "TaskSelected";
    e["payload"] = {{"cursor", "1-1"}, {"choice", 1}};
    lines[2] = e.dump();
  });
  expect_corrupt(dir, id, "2:");
}

TEST(EventStore, MissingHeaderIsCorruptLog) {
  TempDir dir;
  auto id = corrupted_log(dir, [](auto& lines) { lines.erase(lines.begin()); });
  expect_corrupt(dir, id, "0:");
}

TEST(EventStore, EventsFromSeq) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
  append_turn(store, id, {1, 1});
  auto tail = store.events(id, 3);
  ASSERT_EQ(tail.size(), 3u);
  EXPECT_EQ(tail.front().seq, 3);
  EXPECT_EQ(tail.front().kind, EventKind::PromptRendered);
  EXPECT_TRUE(store.events(id, 99).empty());
}

TEST(EventStore, LiveHashEqualsReplayHashAfterEveryEventKind) {
  TempDir dir;
  EventStore store(dir.str());
  std::set<EventKind> seen;
  const std::string id = created(store).id;
  auto check = [&](EventKind kind, json payload) {
    store.append(id, kind, std::move(payload));
    seen.insert(kind);
    EXPECT_EQ(state_hash(store.snapshot(id)), state_hash(store.replay(id))) << to_string(kind);
    EXPECT_EQ(state_hash(store.replay(id)), state_hash(EventStore(dir.str()).replay(id)));
  };
  seen.insert(EventKind::CampaignCreated);
  EXPECT_EQ(state_hash(store.snapshot(id)), state_hash(store.replay(id)));

  check(EventKind::PromptRendered, {{"phase", "scope"}, {"prompt", "scope prompt"}});
  check(EventKind::ModelResponded, {{"phase", "scope"}, {"response", "unusable plan"}});
  check(EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
  check(EventKind::PromptRendered, {{"phase", "navigator"}, {"prompt", "nav"}});
  check(EventKind::ModelResponded, {{"phase", "navigator"}, {"response", "garbage"}});
  check(EventKind::TurnParsed, {{"ok", false}, {"error", "MissingSection: Output Summary"}});
  const StageCursor cursors[] = {{1, 1}, {2, 1}};
  for (StageCursor cur : cursors) {
    const std::string reply = testing::navigator_reply(cur);
    check(EventKind::PromptRendered, {{"phase", "navigator"}, {"prompt", "nav"}});
    check(EventKind::ModelResponded, {{"phase", "navigator"}, {"response", reply}});
    check(EventKind::TurnParsed, {{"ok", true},
                                  {"cursor", format_cursor(cur)},
                                  {"output", to_json_value(parse_navigator_output(reply))},
                                  {"lints", json::array()}});
    check(EventKind::TaskSelected, {{"cursor", format_cursor(cur)}, {"choice", 3}});
    check(EventKind::PromptRendered, {{"phase", "executor"}, {"prompt", "exec"}, {"cursor", format_cursor(cur)}, {"choice", 3}});
    check(EventKind::ModelResponded, {{"phase", "executor"}, {"response", testing::corpus_file("executor/output.txt")}});
    check(EventKind::FeedbackRecorded, {{"cursor", format_cursor(cur)}, {"text", "Done. I'm ready to move to the next stage."}});
    if (cur.stage == 1) {
      check(EventKind::CursorAdvanced, {{"from", "1-1"}, {"to", "2-1"}});
    } else {
      check(EventKind::CampaignCompleted, {{"from", "2-1"}});
    }
  }
  check(EventKind::ScoreRecorded, {{"score", to_json_value(make_score({id, {2, 1}, 2}, 1, 1, 0))}});

  const Campaign c = store.snapshot(id);
  EXPECT_EQ(c.status, CampaignStatus::Complete);
  EXPECT_EQ(c.failed_turns.size(), 1u);
  ASSERT_TRUE(c.turns.at(0).brief);
  EXPECT_EQ(c.turns.at(0).brief->steps.size(), 7u);
  EXPECT_EQ(seen.size(), 10u);  // every EventKind
}

TEST(EventStore, ConcurrentAppendsAreSerialized) {
  TempDir dir;
  EventStore store(dir.str());
  const std::string id = created(store).id;
  store.append(id, EventKind::BlueprintSet, {{"blueprint", to_json_value(two_stage_blueprint())}});
  append_turn(store, id, {1, 1});
  std::vector<std::thread> threads;
  for (int choice = 1; choice <= 3; ++choice) {
    threads.emplace_back([&, choice] {
      for (int k = 0; k < 20; ++k) {
        store.append(id, EventKind::ScoreRecorded,
                     {{"score", to_json_value(make_score({id, {1, 1}, choice}, k % 2, 1, 0))}, {"overwrite", true}});
      }
    });
  }
  for (auto& t : threads) t.join();
  auto events = store.events(id);
  ASSERT_EQ(events.size(), 5u + 60u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, static_cast<std::int64_t>(i + 1));
  EXPECT_EQ(store.snapshot(id).scores.size(), 3u);
  EXPECT_EQ(state_hash(store.snapshot(id)), state_hash(store.replay(id)));
}

TEST(EventStore, ApplyEventLeavesCampaignUnchangedOnThrow) {
  Campaign c;
  apply_event(c, {1, "", EventKind::CampaignCreated, {{"id", "x"}, {"subject", "s"}}});
  const Campaign before = c;
  EXPECT_THROW(apply_event(c, {2, "", EventKind::FeedbackRecorded, {{"text", "t"}}}), Error);
  EXPECT_EQ(c, before);
}

TEST(EventStore, StateHashIgnoresTimestamps) {
  std::vector<Event> a = {{1, "2020-01-01T00:00:00Z", EventKind::CampaignCreated, {{"id", "x"}, {"subject", "s"}}}};
  std::vector<Event> b = a;
  b[0].at = "2030-06-01T12:00:00Z";
  EXPECT_EQ(state_hash(fold_events(a)), state_hash(fold_events(b)));
  EXPECT_EQ(state_hash(fold_events(a)).size(), 64u);
}

TEST(EventStore, RejectsBadCampaignIds) {
  TempDir dir;
  EventStore store(dir.str());
  NewCampaign spec;
  spec.subject = "s";
  spec.id = "../escape";
  EXPECT_THROW(store.create_campaign(spec), Error);
  spec.id = "ok_id-1";
  EXPECT_EQ(store.create_campaign(spec).id, "ok_id-1");
  EXPECT_THROW(store.create_campaign(spec), Error);  // exists
}

}  // namespace
}  // namespace labloop
