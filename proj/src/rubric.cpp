#include "labloop/rubric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "labloop/error.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

CriterionResult criterion(std::string name, int sum, int task_count) {
  return {std::move(name), sum, 100.0 * sum / task_count, truncated_percent_tenths(sum, task_count)};
}

int to_int(const std::string& s, std::string_view what) {
  std::string_view t = trim(s);
  if (t.empty() || t.size() > 9 || !std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorCode::NonIntegerField, std::string(what) + " = \"" + std::string(t) + "\"");
  }
  return std::stoi(std::string(t));
}

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

}  // namespace

int truncated_percent_tenths(long long num, long long den) {
  if (den <= 0) throw Error(ErrorCode::ZeroTasks);
  return static_cast<int>((1000 * num) / den);
}

std::string format_tenths(int tenths) {
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

RubricReport aggregate(const std::vector<RubricScore>& scores, int task_count) {
  if (task_count <= 0) throw Error(ErrorCode::ZeroTasks);
  if (static_cast<int>(scores.size()) > task_count) {
    throw Error(ErrorCode::InvalidArgument,
                std::to_string(scores.size()) + " scores for " + std::to_string(task_count) + " tasks");
  }
  int r = 0, p = 0, h = 0;
  for (const auto& s : scores) {
    r += s.relevance;
    p += s.progress;
    h += s.helpfulness;
  }
  RubricReport out;
  out.task_count = task_count;
  out.relevance = criterion("Relevance", r, task_count);
  out.progress = criterion("Potential for Progress", p, task_count);
  out.helpfulness = criterion("Helpfulness", h, task_count);
  out.total_sum = r + p + h;
  out.total_raw_percent = 100.0 * out.total_sum / (3.0 * task_count);
  out.total_percent_tenths = truncated_percent_tenths(out.total_sum, 3LL * task_count);
  return out;
}

PublishedRubric published_rubric_from_json(const json& j) {
  auto tenths = [](const json& v) { return static_cast<int>(std::llround(v.get<double>() * 10.0)); };
  const json& c = j.at("criteria");
  PublishedRubric p;
  p.task_count = j.at("task_count").get<int>();
  p.relevance_sum = c.at("relevance").at("sum").get<int>();
  p.progress_sum = c.at("progress").at("sum").get<int>();
  p.helpfulness_sum = c.at("helpfulness").at("sum").get<int>();
  p.relevance_tenths = tenths(c.at("relevance").at("percent"));
  p.progress_tenths = tenths(c.at("progress").at("percent"));
  p.helpfulness_tenths = tenths(c.at("helpfulness").at("percent"));
  p.total_sum = j.at("total").at("sum").get<int>();
  p.total_tenths = tenths(j.at("total").at("percent"));
  return p;
}

std::vector<DocumentedDiscrepancy> compare_with_published(const RubricReport& report,
                                                          const PublishedRubric& published) {
  std::vector<DocumentedDiscrepancy> out;
  auto check = [&](const std::string& row, int sum, int tenths, int pub_sum, int pub_tenths) {
    if (sum != pub_sum) out.push_back({row, "sum", std::to_string(sum), std::to_string(pub_sum)});
    if (tenths != pub_tenths) out.push_back({row, "percent", format_tenths(tenths), format_tenths(pub_tenths)});
  };
  check(report.relevance.name, report.relevance.sum, report.relevance.percent_tenths, published.relevance_sum,
        published.relevance_tenths);
  check(report.progress.name, report.progress.sum, report.progress.percent_tenths, published.progress_sum,
        published.progress_tenths);
  check(report.helpfulness.name, report.helpfulness.sum, report.helpfulness.percent_tenths,
        published.helpfulness_sum, published.helpfulness_tenths);
  check("Total", report.total_sum, report.total_percent_tenths, published.total_sum, published.total_tenths);
  return out;
}

std::string format_rubric_table(const RubricReport& report, const std::optional<PublishedRubric>& published) {
  std::ostringstream out;
  out << "Assessment of " << report.task_count << " task suggestions\n";
  out << pad_right("Criteria", 24) << pad_left("Score", 7) << pad_left("Percentage (%)", 16);
  if (published) out << pad_left("Published (%)", 15);
  out << "\n";
  auto row = [&](const std::string& name, int sum, int tenths, int pub_sum, int pub_tenths) {
    out << pad_right(name, 24) << pad_left(std::to_string(sum), 7) << pad_left(format_tenths(tenths), 16);
    if (published) {
      out << pad_left(format_tenths(pub_tenths), 15);
      if (sum != pub_sum || tenths != pub_tenths) out << "  [discrepancy]";
    }
    out << "\n";
  };
  const PublishedRubric p = published.value_or(PublishedRubric{});
  row(report.relevance.name, report.relevance.sum, report.relevance.percent_tenths, p.relevance_sum,
      p.relevance_tenths);
  row(report.progress.name, report.progress.sum, report.progress.percent_tenths, p.progress_sum, p.progress_tenths);
  row(report.helpfulness.name, report.helpfulness.sum, report.helpfulness.percent_tenths, p.helpfulness_sum,
      p.helpfulness_tenths);
  row("Total", report.total_sum, report.total_percent_tenths, p.total_sum, p.total_tenths);
  if (published) {
    for (const auto& d : compare_with_published(report, *published)) {
      out << "discrepancy: " << d.row << " " << d.field << " computed " << d.computed << ", published "
          << d.published << "\n";
    }
  }
  return out.str();
}

json to_json_value(const RubricReport& report) {
  auto crit = [](const CriterionResult& c) {
    return json{{"name", c.name},
                {"sum", c.sum},
                {"percent", format_tenths(c.percent_tenths)},
                {"raw_percent", c.raw_percent}};
  };
  return {{"task_count", report.task_count},
          {"relevance", crit(report.relevance)},
          {"progress", crit(report.progress)},
          {"helpfulness", crit(report.helpfulness)},
          {"total", {{"sum", report.total_sum},
                     {"percent", format_tenths(report.total_percent_tenths)},
                     {"raw_percent", report.total_raw_percent}}}};
}

json to_json_value(const DocumentedDiscrepancy& d) {
  return {{"row", d.row}, {"field", d.field}, {"computed", d.computed}, {"published", d.published}};
}

std::string export_scores_csv(const std::vector<RubricScore>& scores) {
  std::string out = "task_ref,relevance,progress,helpfulness,total\n";
  for (const auto& s : scores) {
    out += csv_escape(format_task_ref(s.task_ref)) + "," + std::to_string(s.relevance) + "," +
           std::to_string(s.progress) + "," + std::to_string(s.helpfulness) + "," + std::to_string(s.total()) + "\n";
  }
  return out;
}

TaskRef parse_task_ref(std::string_view text) {
  text = trim(text);
  auto last = text.rfind(':');
  if (last == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "task ref \"" + std::string(text) + "\"");
  auto mid = text.rfind(':', last - 1);
  if (mid == std::string_view::npos || mid == 0) {
    throw Error(ErrorCode::InvalidArgument, "task ref \"" + std::string(text) + "\" is not id:stage-iteration:choice");
  }
  return TaskRef{std::string(text.substr(0, mid)), parse_cursor(text.substr(mid + 1, last - mid - 1)),
                 to_int(std::string(text.substr(last + 1)), "choice")};
}

std::vector<RubricScore> import_scores_csv(std::string_view text) {
  auto lines = split_lines(text);
  if (lines.empty()) return {};
  auto header = split_csv_line(lines[0]);
  for (auto& h : header) h = std::string(trim(h));
  const bool ref_form = !header.empty() && header[0] == "task_ref";
  const std::size_t base = ref_form ? 1 : 3;
  if (!ref_form && (header.size() < 6 || header[0] != "campaign" || header[1] != "cursor" || header[2] != "choice")) {
    throw Error(ErrorCode::InvalidArgument, "unrecognized score CSV header");
  }
  std::vector<RubricScore> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto f = split_csv_line(lines[i]);
    const std::string where = "line " + std::to_string(i + 1);
    if (f.size() < base + 3) throw Error(ErrorCode::InvalidArgument, where + ": too few fields");
    TaskRef ref = ref_form ? parse_task_ref(f[0])
                           : TaskRef{std::string(trim(f[0])), parse_cursor(f[1]), to_int(f[2], "choice")};
    RubricScore s = make_score(ref, to_int(f[base], "relevance"), to_int(f[base + 1], "progress"),
                               to_int(f[base + 2], "helpfulness"));
    if (f.size() > base + 3 && !trim(f[base + 3]).empty() && to_int(f[base + 3], "total") != s.total()) {
      throw Error(ErrorCode::InvalidArgument, where + ": total does not equal the criterion sum");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace labloop
