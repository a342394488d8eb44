#include "properties.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <variant>

#include "labloop/error.hpp"
#include "labloop/executor.hpp"
#include "labloop/navigator.hpp"
#include "labloop/rubric.hpp"
#include "labloop/text.hpp"

namespace labloop::testing {

namespace {

const std::vector<std::string> kFeedbackWords = {
    "The",      "yield",   "was",   "low",    "PXRD",  "shows",  "a",       "crystalline", "phase", "ready",
    "move",     "next",    "stage", "step",   "to",    "the",    "I'm",     "I am",        "not",   "yet",
    "let's",    "repeat",  "at",    "120",    "C",     "for",    "48",      "h",           "8.5",   "ppm",
    "Try",      "again",   "with",  "more",   "modulator", "ready?", "moving", "on",       "stage.", "!",
    "\xE2\x80\x99", "\n", "  ",   "\t",     "done",  "finished", "iteration", "1-5",      "2-1",   "MOVE",
};

const std::vector<std::string> kNearMisses = {
    "I'm ready to move to the next step",  "I'm ready to move on",      "ready to move to the next stage",
    "I'm not ready to move to the next",   "I'm ready to go to the next stage", "Im ready to move to the next stage",
    "I'm ready to move to next stage",     "I'm ready to move to the stage",    "I'm ready to move the next stage",
};

template <typename Fn>
void check(PropertyResult& r, int cases, Fn&& one_case) {
  for (int i = 0; i < cases; ++i) {
    ++r.cases;
    std::string why;
    bool ok = false;
    try {
      ok = one_case(why);
    } catch (const std::exception& e) {
      why += std::string(" threw ") + e.what();
    }
    if (!ok) {
      if (r.failures++ == 0) r.counterexample = why;
    }
  }
}

std::string escaped(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

}  // namespace

StageCursor Gen::cursor(int stage_count) {
  const int stage = uniform(1, stage_count);
  const int iteration = coin(0.8) ? uniform(1, 12) : uniform(13, 100000);
  return {stage, iteration};
}

std::string Gen::feedback_text() {
  std::string out;
  const int n = uniform(0, 25);
  for (int i = 0; i < n; ++i) {
    if (coin(0.1)) {
      out += pick(kNearMisses);
    } else {
      out += pick(kFeedbackWords);
    }
    out += coin(0.8) ? " " : "";
  }
  return out;
}

std::string Gen::non_sentinel_feedback(int* rejected) {
  for (;;) {
    std::string text = feedback_text();
    if (!detect_sentinel(text)) return text;
    if (rejected != nullptr) ++*rejected;
  }
}

std::string Gen::sentinel_feedback() {
  std::string phrase(kSentinelPhrase);
  for (auto& c : phrase) {
    if (coin(0.2)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (coin(0.3)) {
    const auto apostrophe = phrase.find('\'');
    phrase.replace(apostrophe, 1, "\xE2\x80\x99");
  }
  if (coin(0.3)) {
    const auto space = phrase.find(' ');
    phrase.replace(space, 1, " \n ");
  }
  return feedback_text() + (coin() ? "\n" : " ") + phrase + pick(std::vector<std::string>{"", ".", "!", "\""}) +
         (coin() ? " " + feedback_text() : "");
}

std::string Gen::report_template() {
  static const std::vector<std::string> kNames = {"Yield (%)", "BET surface area", "temp", "time", "a", "Notes",
                                                  "PXRD peaks (2θ)", "Sample ID", "x"};
  std::string out;
  const int parts = uniform(0, 14);
  for (int i = 0; i < parts; ++i) {
    switch (uniform(0, 5)) {
      case 0: out += "[" + pick(kNames) + "]"; break;
      case 1: out += "[" + pick(kNames) + " [" + pick(kNames) + "]]"; break;
      case 2: out += pick(std::vector<std::string>{"- ", ": ", "\n", "\n\n", " | "}); break;
      case 3: out += pick(std::vector<std::string>{"]", "[", "[]", "a]b", "x[y"}); break;
      default: out += prose(); break;
    }
  }
  return out;
}

std::string Gen::prose() {
  static const std::vector<std::string> kWords = {"The", "sample", "was", "heated", "to", "8.5", "Dr.", "e.g.",
                                                  "at", "120", "C", "3.14", "done", "yield", "...", "?!", "U.S."};
  std::string out;
  const int n = uniform(0, 30);
  for (int i = 0; i < n; ++i) {
    out += pick(kWords);
    const int p = uniform(0, 9);
    if (p == 0) out += ".";
    if (p == 1) out += "!";
    if (p == 2) out += "?";
    out += pick(std::vector<std::string>{" ", " ", " ", "\n", "  ", ""});
  }
  return out;
}

std::vector<RubricScore> Gen::scores(int* task_count) {
  const int turns = uniform(1, 40);
  *task_count = turns * 3;
  std::vector<RubricScore> out;
  for (int t = 0; t < turns; ++t) {
    for (int choice = 1; choice <= 3; ++choice) {
      if (coin(0.2)) continue;  // unscored tasks still count toward task_count
      out.push_back(make_score({"c", {1 + t / 10, 1 + t % 10}, choice}, uniform(0, 1), uniform(0, 1), uniform(0, 1)));
    }
  }
  return out;
}

PropertyResult prop_advance_keeps_stage_without_sentinel(std::uint64_t seed, int cases) {
  PropertyResult r{"advance_cursor keeps the stage on non-sentinel feedback"};
  Gen g(seed);
  int rejected = 0;
  check(r, cases, [&](std::string& why) {
    const int k = g.uniform(1, 12);
    const StageCursor c = g.cursor(k);
    const std::string text = g.non_sentinel_feedback(&rejected);
    const AdvanceResult next = advance_cursor(c, Feedback(text), k);
    const auto* to = std::get_if<StageCursor>(&next);
    why = "K=" + std::to_string(k) + " cursor " + format_cursor(c) + " feedback " + escaped(text);
    return to != nullptr && to->stage == c.stage && to->iteration == c.iteration + 1;
  });
  return r;
}

PropertyResult prop_sentinel_moves_to_next_stage(std::uint64_t seed, int cases) {
  PropertyResult r{"sentinel feedback moves stage s<K to (s+1, 1) and completes at K"};
  Gen g(seed);
  check(r, cases, [&](std::string& why) {
    const int k = g.uniform(1, 12);
    const StageCursor c = g.cursor(k);
    const std::string text = g.sentinel_feedback();
    const AdvanceResult next = advance_cursor(c, Feedback(text), k);
    why = "K=" + std::to_string(k) + " cursor " + format_cursor(c) + " feedback " + escaped(text);
    if (c.stage == k) return std::holds_alternative<CampaignComplete>(next);
    const auto* to = std::get_if<StageCursor>(&next);
    return to != nullptr && *to == StageCursor{c.stage + 1, 1};
  });
  return r;
}

PropertyResult prop_cursor_round_trip(std::uint64_t seed, int cases) {
  PropertyResult r{"parse_cursor(format_cursor(c)) == c"};
  Gen g(seed);
  const std::vector<std::string> pads = {"", " ", "\t", "\n", "  \r\n"};
  check(r, cases, [&](std::string& why) {
    StageCursor c{g.uniform(1, 1000000), g.coin(0.5) ? g.uniform(1, 99) : g.uniform(1, 2000000000)};
    const std::string text = g.pick(pads) + format_cursor(c) + g.pick(pads);
    why = "cursor " + format_cursor(c) + " text " + escaped(text);
    return parse_cursor(text) == c && format_cursor(parse_cursor(format_cursor(c))) == format_cursor(c);
  });
  return r;
}

PropertyResult prop_slot_identity_instantiation(std::uint64_t seed, int cases) {
  PropertyResult r{"identity slot values reproduce the report template byte for byte"};
  Gen g(seed);
  check(r, cases, [&](std::string& why) {
    ExecutorBrief brief;
    brief.report_template = g.report_template();
    brief.slots = extract_slots(brief.report_template);
    std::map<std::string, std::string> identity;
    for (const auto& s : brief.slots) identity[s] = "[" + s + "]";
    const InstantiatedReport out = instantiate_report(brief, identity);
    why = "template " + escaped(brief.report_template);
    return out.text == brief.report_template && out.unfilled.empty();
  });
  return r;
}

PropertyResult prop_aggregation_order_independent(std::uint64_t seed, int cases) {
  PropertyResult r{"rubric aggregation ignores score order"};
  Gen g(seed);
  auto same = [](const RubricReport& a, const RubricReport& b) {
    auto eq = [](const CriterionResult& x, const CriterionResult& y) {
      return x.name == y.name && x.sum == y.sum && x.raw_percent == y.raw_percent && x.percent_tenths == y.percent_tenths;
    };
    return a.task_count == b.task_count && eq(a.relevance, b.relevance) && eq(a.progress, b.progress) &&
           eq(a.helpfulness, b.helpfulness) && a.total_sum == b.total_sum &&
           a.total_raw_percent == b.total_raw_percent && a.total_percent_tenths == b.total_percent_tenths;
  };
  check(r, cases, [&](std::string& why) {
    int tasks = 0;
    std::vector<RubricScore> scores = g.scores(&tasks);
    const RubricReport base = aggregate(scores, tasks);
    std::shuffle(scores.begin(), scores.end(), g.engine());
    const RubricReport shuffled = aggregate(scores, tasks);
    std::reverse(scores.begin(), scores.end());
    const RubricReport reversed = aggregate(scores, tasks);
    why = std::to_string(scores.size()) + " scores over " + std::to_string(tasks) + " tasks";
    return same(base, shuffled) && same(base, reversed);
  });
  return r;
}

PropertyResult prop_count_sentences_pure(std::uint64_t seed, int cases) {
  PropertyResult r{"count_sentences is a pure function of its text"};
  Gen g(seed);
  check(r, cases, [&](std::string& why) {
    const std::string text = g.prose();
    const std::string copy = text;
    const int first = count_sentences(text);
    const int interleaved = count_sentences(g.prose());
    (void)interleaved;
    why = "text " + escaped(text);
    return first == count_sentences(copy) && first == count_sentences(std::string_view(text)) && first >= 0;
  });
  return r;
}

std::vector<PropertyResult> run_property_suites(std::uint64_t seed) {
  return {
      prop_advance_keeps_stage_without_sentinel(seed, kAdvanceCases),
      prop_sentinel_moves_to_next_stage(seed + 1, kDefaultCases),
      prop_cursor_round_trip(seed + 2, kDefaultCases),
      prop_slot_identity_instantiation(seed + 3, kDefaultCases),
      prop_aggregation_order_independent(seed + 4, kDefaultCases),
      prop_count_sentences_pure(seed + 5, kDefaultCases),
  };
}

}  // namespace labloop::testing
