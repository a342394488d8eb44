#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/scope.hpp"

using namespace labloop;
using labloop::testing::bundled_corpus;
using labloop::testing::corpus_file;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    parse_navigator_output(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse succeeded";
  return ErrorCode::InvalidArgument;
}

std::string well_formed(std::string cursor = "2-3") {
  return "Output Summary: We made the linker.\n\nCurrent Stage and Iteration: " + cursor +
         "\n\nStatus Evaluation: It worked.\n\nTask Choice 1: Do A.\n\nTask Choice 2: Do B.\n\nTask Choice 3: Do C.\n";
}

Campaign campaign_with_blueprint() {
  Campaign c;
  c.id = "c1";
  c.subject = "BTB-H";
  c.blueprint = parse_scope_output(corpus_file("scope/blueprint_refined.txt"));
  c.stage_count = c.blueprint->size();
  c.status = CampaignStatus::Active;
  return c;
}

}  // namespace

TEST(NavigatorParse, FirstTurnFixture) {
  NavigatorOutput out = parse_navigator_output(corpus_file("navigator/H/turn_01.txt"));
  EXPECT_EQ(out.cursor(), (StageCursor{1, 1}));
  EXPECT_TRUE(out.evaluation().starts_with("As we're at the beginning"));
  ASSERT_EQ(out.choices().size(), 3u);
  EXPECT_TRUE(out.choice(1).text.starts_with("Begin the synthesis of Benzene Tribenzoate"));
  EXPECT_EQ(out.choice(1).sentence_count, 7);
}

TEST(NavigatorParse, StageTwoIterationSix) {
  const auto& h = bundled_corpus().campaign("H");
  auto it = std::find_if(h.turns.begin(), h.turns.end(), [](const CorpusTurn& t) { return t.turn == 11; });
  ASSERT_NE(it, h.turns.end());
  EXPECT_EQ(parse_navigator_output(bundled_corpus().turn_text(*it)).cursor(), (StageCursor{2, 6}));
}

TEST(NavigatorParse, SectionOrderIsFree) {
  std::string text =
      "Task Choice 3: C.\nTask Choice 1: A.\nStatus Evaluation: fine\nCurrent Stage and Iteration: 3-7\n"
      "Task Choice 2: B.\nOutput Summary: s.\n";
  NavigatorOutput out = parse_navigator_output(text);
  EXPECT_EQ(out.cursor(), (StageCursor{3, 7}));
  EXPECT_EQ(out.choice(1).text, "A.");
  EXPECT_EQ(out.choice(3).text, "C.");
}

TEST(NavigatorParse, ToleratesBoldAndCase) {
  std::string text =
      "**Output Summary:** s.\n**current stage and iteration**: 1-2\n## Status Evaluation:\nok\n"
      "**Task Choice 1:** a.\nTASK CHOICE 2: b.\n*Task Choice 3*: c.\n";
  NavigatorOutput out = parse_navigator_output(text);
  EXPECT_EQ(out.cursor(), (StageCursor{1, 2}));
  EXPECT_EQ(out.evaluation(), "ok");
  EXPECT_EQ(out.choice(2).text, "b.");
}

TEST(NavigatorParse, MultiLineSectionsKeepContinuationLines) {
  std::string text = well_formed();
  text.replace(text.find("Do A."), 5, "Do A.\nThen more A.");
  EXPECT_EQ(parse_navigator_output(text).choice(1).text, "Do A.\nThen more A.");
}

TEST(NavigatorParse, MissingTaskChoiceThree) {
  std::string text = well_formed();
  text.erase(text.find("Task Choice 3"));
  try {
    parse_navigator_output(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingSection);
    EXPECT_EQ(e.detail(), "Task Choice 3");
  }
}

TEST(NavigatorParse, DuplicateSection) {
  EXPECT_EQ(parse_error(well_formed() + "Task Choice 2: again\n"), ErrorCode::DuplicateSection);
}

TEST(NavigatorParse, MalformedCursor) { EXPECT_EQ(parse_error(well_formed("two-three")), ErrorCode::MalformedCursor); }

TEST(NavigatorParse, JunkIsMissingSection) { EXPECT_EQ(parse_error("hello"), ErrorCode::MissingSection); }

TEST(NavigatorParse, TaskChoiceTenDoesNotMatchOne) {
  std::string text = well_formed() + "Task Choice 10: extra\n";
  EXPECT_EQ(parse_navigator_output(text).choice(3).text, "Do C.\nTask Choice 10: extra");
}

TEST(NavigatorParse, RenderedPromptNeverParses) {
  Campaign c = campaign_with_blueprint();
  std::string prompt = render_navigator_prompt(c, NavigatorInput::first_turn());
  EXPECT_THROW(parse_navigator_output(prompt), Error);
  auto skeleton_at = prompt.find("Output Summary: <updated summary>");
  ASSERT_NE(skeleton_at, std::string::npos);
  EXPECT_EQ(parse_error(prompt.substr(skeleton_at)), ErrorCode::PlaceholderSection);
}

TEST(Sentinel, Detection) {
  EXPECT_TRUE(detect_sentinel("I'm ready to move to the next stage."));
  EXPECT_TRUE(detect_sentinel("i'm READY to move to the next stage"));
  EXPECT_TRUE(detect_sentinel("I\xE2\x80\x99m ready to move   to the\nnext stage!"));
  EXPECT_TRUE(detect_sentinel("Results look great. I'm ready to move to the next stage."));
  EXPECT_FALSE(detect_sentinel("We should optimize more before proceeding."));
  EXPECT_FALSE(detect_sentinel("I'm not ready to move to the next stage"));
  EXPECT_FALSE(detect_sentinel(""));
}

TEST(Sentinel, FeedbackCachesDetection) {
  EXPECT_TRUE(Feedback("I'm ready to move to the next stage").sentinel());
  EXPECT_FALSE(Feedback("keep going").sentinel());
}

TEST(Advance, Examples) {
  const Feedback ready("I'm ready to move to the next stage.");
  const Feedback more("Let's try again.");
  EXPECT_EQ(std::get<StageCursor>(advance_cursor({3, 6}, ready, 5)), (StageCursor{4, 1}));
  EXPECT_EQ(std::get<StageCursor>(advance_cursor({3, 6}, more, 5)), (StageCursor{3, 7}));
  EXPECT_EQ(std::get<StageCursor>(advance_cursor({1, 5}, ready, 5)), (StageCursor{2, 1}));
  EXPECT_TRUE(std::holds_alternative<CampaignComplete>(advance_cursor({5, 4}, ready, 5)));
  EXPECT_EQ(std::get<StageCursor>(advance_cursor({5, 4}, more, 5)), (StageCursor{5, 5}));
}

TEST(Advance, CursorBeyondStageCountIsRejected) {
  EXPECT_THROW(advance_cursor({6, 1}, Feedback("x"), 5), Error);
}

TEST(Lint, SummaryTooLong) {
  std::string summary;
  for (int i = 0; i < 31; ++i) summary += "Word. ";
  std::vector<TaskChoice> choices;
  std::string ten;
  for (int i = 0; i < 10; ++i) ten += "Step. ";
  for (int i = 1; i <= 3; ++i) choices.push_back(make_task_choice(i, ten));
  NavigatorOutput out(summary, {1, 1}, "eval", choices);
  auto lints = lint_turn(out, StageCursor{1, 1});
  ASSERT_EQ(lints.size(), 1u);
  EXPECT_EQ(lints[0].kind, LintKind::SummaryTooLong);
}

TEST(Lint, ChoiceLengthAndDivergence) {
  std::string ten;
  for (int i = 0; i < 10; ++i) ten += "Step. ";
  NavigatorOutput out("s.", {1, 6}, "e",
                      {make_task_choice(1, ten), make_task_choice(2, "One. Two. Three. Four. Five."),
                       make_task_choice(3, ten + ten + "Extra.")});
  auto lints = lint_turn(out, StageCursor{2, 1});
  ASSERT_EQ(lints.size(), 3u);
  EXPECT_EQ(lints[0].kind, LintKind::TaskChoiceLengthOutOfRange);
  EXPECT_EQ(lints[0].choice, 2);
  EXPECT_EQ(lints[1].choice, 3);
  EXPECT_EQ(lints[2].kind, LintKind::CursorDivergence);
}

TEST(Lint, CorpusHasNoCursorDivergence) {
  const Corpus& corpus = bundled_corpus();
  int divergent = 0;
  for (const auto& campaign : corpus.campaigns()) {
    for (const auto& turn : campaign.turns) {
      auto lints = lint_turn(parse_navigator_output(corpus.turn_text(turn)), turn.cursor);
      for (const auto& l : lints) divergent += l.kind == LintKind::CursorDivergence ? 1 : 0;
    }
  }
  EXPECT_EQ(divergent, 0);
}

TEST(Lint, OnlyTheMfFinalSummaryExceedsTheLimit) {
  const Corpus& corpus = bundled_corpus();
  std::vector<std::string> too_long;
  for (const auto& campaign : corpus.campaigns()) {
    for (const auto& turn : campaign.turns) {
      auto out = parse_navigator_output(corpus.turn_text(turn));
      for (const auto& l : lint_turn(out, std::nullopt)) {
        if (l.kind == LintKind::SummaryTooLong) too_long.push_back(turn.file);
      }
    }
  }
  EXPECT_EQ(too_long, std::vector<std::string>{corpus.campaign("mF").turns.back().file});
}

TEST(NavigatorRender, FirstCampaignHasNoExemplarBlock) {
  Campaign c = campaign_with_blueprint();
  std::string prompt = render_navigator_prompt(c, NavigatorInput::first_turn());
  EXPECT_TRUE(prompt.starts_with("You are an AI reticular chemist"));
  EXPECT_NE(prompt.find("novel aluminum MOF using BTB-H as a linker"), std::string::npos);
  EXPECT_NE(prompt.find("structured into five stages:"), std::string::npos);
  EXPECT_NE(prompt.find("1) Synthesis of Organic Linker."), std::string::npos);
  EXPECT_EQ(prompt.find("example of work summary"), std::string::npos);
  EXPECT_NE(prompt.find("Current Summary: " + std::string(kFirstTurnMarker)), std::string::npos);
  EXPECT_NE(prompt.find("Last Iteration: " + std::string(kFirstTurnMarker)), std::string::npos);
  EXPECT_NE(prompt.find("Human Feedback: " + std::string(kFirstTurnMarker)), std::string::npos);
  EXPECT_EQ(prompt.find('{'), std::string::npos);
}

TEST(NavigatorRender, ExemplarBlockWhenPresent) {
  Campaign c = campaign_with_blueprint();
  c.subject = "BTB-oF";
  c.exemplar_subject = "BTB-H";
  c.exemplar_summary = corpus_file("summaries/final_H.txt");
  std::string prompt = render_navigator_prompt(c, NavigatorInput::first_turn());
  EXPECT_NE(prompt.find("example of work summary of another project using BTB-H linker"), std::string::npos);
  EXPECT_NE(prompt.find(std::string(trim(*c.exemplar_summary))), std::string::npos);
  EXPECT_LT(prompt.find("example of work summary"), prompt.find("Here are the inputs"));
}

TEST(NavigatorRender, InputsAreSubstituted) {
  Campaign c = campaign_with_blueprint();
  NavigatorInput in{"So far so good.", StageCursor{2, 3}, "Run PXRD.", Feedback("Peaks look sharp.")};
  std::string prompt = render_navigator_prompt(c, in);
  EXPECT_NE(prompt.find("Current Summary: So far so good."), std::string::npos);
  EXPECT_NE(prompt.find("Last Iteration: 2-3"), std::string::npos);
  EXPECT_NE(prompt.find("Latest Task: Run PXRD."), std::string::npos);
  EXPECT_NE(prompt.find("Human Feedback: Peaks look sharp."), std::string::npos);
}

TEST(NavigatorRender, RequiresBlueprint) {
  Campaign c;
  try {
    render_navigator_prompt(c, NavigatorInput::first_turn());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingBlueprint);
  }
}

TEST(NavigatorRender, Deterministic) {
  Campaign c = campaign_with_blueprint();
  EXPECT_EQ(render_navigator_prompt(c, NavigatorInput::first_turn()),
            render_navigator_prompt(c, NavigatorInput::first_turn()));
}
