#include "labloop/corpus.hpp"

#include <algorithm>
#include <sstream>

#include "labloop/error.hpp"
#include "labloop/navigator.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

constexpr std::string_view kIndexHeader = "campaign,turn,cursor,feedback,file,elided";
constexpr int kCorpusStageCount = 5;

bool has_token(std::string_view list, std::string_view token) {
  std::size_t start = 0;
  while (start <= list.size()) {
    auto semi = list.find(';', start);
    if (trim(list.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start)) == token) {
      return true;
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return false;
}

}  // namespace

Corpus Corpus::load(const std::string& dir) {
  Corpus c;
  c.dir_ = dir;
  std::string index = read_file(c.path("navigator/index.csv"));
  auto lines = split_lines(index);
  if (lines.empty() || trim(lines[0]) != kIndexHeader) {
    throw Error(ErrorCode::CorruptLog, "navigator/index.csv: unexpected header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split_csv_line(lines[i]);
    if (f.size() != 6) throw Error(ErrorCode::CorruptLog, "navigator/index.csv:" + std::to_string(i + 1));
    CorpusTurn t;
    t.campaign = f[0];
    t.turn = std::stoi(f[1]);
    t.cursor = parse_cursor(f[2]);
    if (f[3] != "sentinel" && f[3] != "continue") {
      throw Error(ErrorCode::CorruptLog, "navigator/index.csv:" + std::to_string(i + 1) + ": feedback " + f[3]);
    }
    t.sentinel = f[3] == "sentinel";
    t.file = f[4];
    t.summary_elided = has_token(f[5], "summary");
    t.choice3_elided = has_token(f[5], "choice3");
    auto it = std::find_if(c.campaigns_.begin(), c.campaigns_.end(),
                           [&](const CorpusCampaign& cc) { return cc.key == t.campaign; });
    if (it == c.campaigns_.end()) {
      c.campaigns_.push_back({t.campaign, "BTB-" + t.campaign, {}});
      it = c.campaigns_.end() - 1;
    }
    it->turns.push_back(std::move(t));
  }
  return c;
}

const CorpusCampaign& Corpus::campaign(std::string_view key) const {
  for (const auto& c : campaigns_) {
    if (c.key == key) return c;
  }
  throw Error(ErrorCode::NoSuchCampaign, std::string(key));
}

std::string Corpus::path(std::string_view relative) const { return dir_ + "/" + std::string(relative); }

std::string Corpus::read(std::string_view relative) const { return read_file(path(relative)); }

std::string Corpus::turn_text(const CorpusTurn& turn) const { return read(turn.file); }

std::string Corpus::final_summary(std::string_view key) const {
  return read("summaries/final_" + std::string(key) + ".txt");
}

int Corpus::turn_count() const {
  int n = 0;
  for (const auto& c : campaigns_) n += static_cast<int>(c.turns.size());
  return n;
}

std::string corpus_feedback_text(const CorpusTurn& turn) {
  if (turn.sentinel) return "The task results are recorded. " + std::string(kSentinelPhrase) + ".";
  return "The task results are recorded. Please continue with the current stage.";
}

bool CorpusVerification::ok() const noexcept {
  return !campaigns.empty() && std::all_of(campaigns.begin(), campaigns.end(), [](const auto& c) { return c.ok(); });
}

int CorpusVerification::turns() const noexcept {
  int n = 0;
  for (const auto& c : campaigns) n += c.turns;
  return n;
}

const CampaignVerification& CorpusVerification::campaign(std::string_view key) const {
  for (const auto& c : campaigns) {
    if (c.key == key) return c;
  }
  throw Error(ErrorCode::NoSuchCampaign, std::string(key));
}

CorpusVerification verify_corpus(const Corpus& corpus) {
  CorpusVerification out;
  for (const auto& campaign : corpus.campaigns()) {
    CampaignVerification v;
    v.key = campaign.key;
    StageCursor expected{1, 1};
    bool done = false;
    std::vector<StageCursor> trajectory;
    for (const auto& turn : campaign.turns) {
      ++v.turns;
      const std::string where = campaign.key + " turn " + std::to_string(turn.turn) + " (" + turn.file + ")";
      if (done) {
        v.problems.push_back(where + ": turn after campaign completion");
        break;
      }
      v.elided_summaries += turn.summary_elided ? 1 : 0;
      v.elided_choices += turn.choice3_elided ? 1 : 0;
      trajectory.push_back(turn.cursor);
      if (turn.cursor != expected) {
        v.problems.push_back(where + ": index cursor " + format_cursor(turn.cursor) + ", advance rule expects " +
                             format_cursor(expected));
      }
      try {
        NavigatorOutput output = parse_navigator_output(corpus.turn_text(turn));
        ++v.parsed;
        if (output.cursor() == expected) {
          ++v.cursor_matches;
        } else {
          v.problems.push_back(where + ": parsed cursor " + format_cursor(output.cursor()) + ", expected " +
                               format_cursor(expected));
        }
      } catch (const Error& e) {
        v.problems.push_back(where + ": " + e.what());
      }

      AdvanceResult next = advance_cursor(expected, Feedback(corpus_feedback_text(turn)), kCorpusStageCount);
      if (const auto* c = std::get_if<StageCursor>(&next)) {
        if (c->stage != expected.stage) v.sentinel_advances.push_back({expected, *c});
        expected = *c;
      } else {
        done = true;
        v.completed = true;
      }
    }
    if (!v.completed) v.problems.push_back(campaign.key + ": transcript ends before completion");
    try {
      v.stats = iteration_stats(trajectory, kCorpusStageCount);
    } catch (const Error& e) {
      v.problems.push_back(campaign.key + ": " + e.what());
    }
    out.campaigns.push_back(std::move(v));
  }
  return out;
}

std::string format_verification(const CorpusVerification& v) {
  std::ostringstream out;
  for (const auto& c : v.campaigns) {
    out << c.key << ": " << c.turns << " turns, " << c.parsed << " parsed, " << c.cursor_matches
        << " cursors match, per-stage";
    for (int n : c.stats.per_stage) out << " " << n;
    out << ", total " << c.stats.total << (c.completed ? ", complete" : ", incomplete");
    if (c.elided_summaries > 0 || c.elided_choices > 0) {
      out << " (elided in source: " << c.elided_summaries << " summaries, " << c.elided_choices << " choices)";
    }
    out << "\n";
    for (const auto& p : c.problems) out << "  problem: " << p << "\n";
  }
  out << "totals:";
  for (std::size_t i = 0; i < v.campaigns.size(); ++i) {
    out << (i == 0 ? " " : "/") << v.campaigns[i].stats.total;
  }
  out << " (" << v.turns() << " turns) " << (v.ok() ? "OK" : "FAILED") << "\n";
  return out.str();
}

json to_json_value(const CorpusVerification& v) {
  json campaigns = json::array();
  for (const auto& c : v.campaigns) {
    json advances = json::array();
    for (const auto& a : c.sentinel_advances) advances.push_back({format_cursor(a.from), format_cursor(a.to)});
    campaigns.push_back({{"campaign", c.key},
                         {"turns", c.turns},
                         {"parsed", c.parsed},
                         {"cursor_matches", c.cursor_matches},
                         {"elided_summaries", c.elided_summaries},
                         {"elided_choices", c.elided_choices},
                         {"completed", c.completed},
                         {"sentinel_advances", advances},
                         {"iterations", to_json_value(c.stats)},
                         {"problems", c.problems}});
  }
  return {{"ok", v.ok()}, {"turns", v.turns()}, {"campaigns", campaigns}};
}

}  // namespace labloop
