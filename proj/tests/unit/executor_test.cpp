#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "labloop/error.hpp"
#include "labloop/executor.hpp"
#include "labloop/navigator.hpp"
#include "labloop/scope.hpp"

using namespace labloop;
using labloop::testing::bundled_corpus;
using labloop::testing::corpus_file;

namespace {

ExecutorBrief fixture_brief() { return parse_executor_output(corpus_file("executor/output.txt")); }

Campaign campaign_with_blueprint() {
  Campaign c;
  c.id = "c1";
  c.subject = "BTB";
  c.blueprint = parse_scope_output(corpus_file("scope/blueprint_refined.txt"));
  c.status = CampaignStatus::Active;
  return c;
}

NavigatorOutput stage_two_output() {
  const auto& h = bundled_corpus().campaign("H");
  return parse_navigator_output(bundled_corpus().turn_text(h.turns[7]));  // 2-3
}

}  // namespace

TEST(ExecutorParse, FixtureStepsAndSlots) {
  ExecutorBrief b = fixture_brief();
  ASSERT_EQ(b.steps.size(), 7u);
  EXPECT_TRUE(b.steps[0].starts_with("1. Prepare your reagents"));
  EXPECT_TRUE(b.steps[6].starts_with("7. Record and interpret"));
  EXPECT_TRUE(b.lints.empty());
  EXPECT_TRUE(b.consolidated_summary.starts_with("This comprehensive report"));
  EXPECT_EQ(b.consolidated_summary.find("Step-by-step"), std::string::npos);
  EXPECT_TRUE(b.report_template.starts_with("Reaction Conditions:"));
  ASSERT_EQ(b.slots.size(), 8u);
  EXPECT_EQ(b.slots[0], "Temperature used");
  EXPECT_EQ(b.slots[1], "Reaction time used");
  EXPECT_EQ(b.slots[7], "Provide a preliminary analysis of the results, considering the impact on MOF's crystallinity and structure");
}

TEST(ExecutorParse, StepsCoverEveryNumberedLine) {
  std::string text = corpus_file("executor/output.txt");
  ExecutorBrief b = parse_executor_output(text);
  std::string all;
  for (const auto& s : b.steps) all += s + "\n";
  auto lines = split_lines(text);
  auto begin = std::find_if(lines.begin(), lines.end(), [](auto l) { return l.starts_with("Step-by-step"); });
  auto end = std::find_if(begin, lines.end(), [](auto l) { return l.starts_with("Template"); });
  int numbered = 0;
  for (auto it = begin; it != end; ++it) {
    if (!it->empty() && std::isdigit(static_cast<unsigned char>((*it)[0]))) {
      ++numbered;
      EXPECT_NE(all.find(std::string(trim(*it))), std::string::npos) << *it;
    }
  }
  EXPECT_EQ(numbered, 7);
}

TEST(ExecutorParse, MissingHeaders) {
  try {
    parse_executor_output("Summary: s\nStep-by-step:\n1. a\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingTemplateSection);
  }
  try {
    parse_executor_output("Summary: s\n1. a\nTemplate:\n[x]\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingStepsSection);
  }
}

TEST(ExecutorParse, NonContiguousStepsAreKeptAndLinted) {
  ExecutorBrief b = parse_executor_output("s\nStep-by-step Process:\n1. a\n2. b\ncontinued\n4. d\nTemplate:\nT: [t]\n");
  ASSERT_EQ(b.steps.size(), 3u);
  EXPECT_EQ(b.steps[1], "2. b\ncontinued");
  EXPECT_EQ(b.steps[2], "4. d");
  ASSERT_EQ(b.lints.size(), 1u);
  EXPECT_EQ(b.lints[0].kind, LintKind::NonContiguousSteps);
}

TEST(ExecutorSlots, OutermostSpansOnly) {
  EXPECT_EQ(extract_slots("a [x] b [y [z]] c [unclosed\n[w]"), (std::vector<std::string>{"x", "y [z]", "w"}));
  EXPECT_TRUE(extract_slots("no slots").empty());
}

TEST(ExecutorReport, FillsNamedSlots) {
  ExecutorBrief b = fixture_brief();
  InstantiatedReport r = instantiate_report(b, {{"Temperature used", "120\xC2\xB0" "C"}});
  EXPECT_NE(r.text.find("Temperature: 120\xC2\xB0" "C"), std::string::npos);
  EXPECT_NE(r.text.find("[Reaction time used]"), std::string::npos);
  EXPECT_EQ(r.unfilled.front(), "Reaction time used");
  EXPECT_EQ(std::count(r.unfilled.begin(), r.unfilled.end(), "Temperature used"), 0);
}

TEST(ExecutorReport, EmptyMapReturnsTemplate) {
  ExecutorBrief b = fixture_brief();
  InstantiatedReport r = instantiate_report(b, {});
  EXPECT_EQ(r.text, b.report_template);
  EXPECT_EQ(r.unfilled.size(), 4u);  // distinct names
}

TEST(ExecutorReport, UnknownSlot) {
  try {
    instantiate_report(fixture_brief(), {{"Pressure", "1 atm"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownSlotName);
  }
}

TEST(ExecutorReport, RepeatedSlotFilledEverywhere) {
  ExecutorBrief b = fixture_brief();
  const std::string name = b.slots[2];
  InstantiatedReport r = instantiate_report(b, {{name, "sharp"}});
  EXPECT_EQ(r.text.find("[" + name + "]"), std::string::npos);
}

TEST(ExecutorRender, ChoiceAndSummaries) {
  Campaign c = campaign_with_blueprint();
  std::vector<StageSummary> summaries = {{{1, 5}, "Linker made."}, {{2, 2}, "Screening started."}};
  std::string prompt = render_executor_prompt(c, summaries, stage_two_output(), 2);
  EXPECT_NE(prompt.find("how do choice 2 and give me a template"), std::string::npos);
  EXPECT_NE(prompt.find("consolidate them into a comprehensive summary"), std::string::npos);
  EXPECT_NE(prompt.find("Stage and Iteration: 1-5, Output Summary: Linker made.;"), std::string::npos);
  EXPECT_NE(prompt.find("Stage and Iteration: 2-2, Output Summary: Screening started.;"), std::string::npos);
  EXPECT_NE(prompt.find("Current Stage and Iteration: 2-3, Output Summary:"), std::string::npos);
  EXPECT_NE(prompt.find("Task Choice 3: " + stage_two_output().choice(3).text), std::string::npos);
  EXPECT_EQ(prompt.find("{number}"), std::string::npos);
}

TEST(ExecutorRender, NoStageSummaries) {
  Campaign c = campaign_with_blueprint();
  std::string prompt = render_executor_prompt(c, {}, stage_two_output(), 1);
  EXPECT_EQ(prompt.find("Stage and Iteration: 1-"), std::string::npos);
  EXPECT_NE(prompt.find("\"\"\n\nCurrent Stage and Iteration: 2-3"), std::string::npos);
}

TEST(ExecutorRender, InvalidChoice) {
  Campaign c = campaign_with_blueprint();
  for (int bad : {0, 4, -1}) {
    try {
      render_executor_prompt(c, {}, stage_two_output(), bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidChoiceIndex);
    }
  }
}
