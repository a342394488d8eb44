#include "labloop/labdata.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

#include "labloop/error.hpp"
#include "labloop/text.hpp"

namespace labloop {

namespace {

constexpr std::string_view kHeader = "exp_id,linker,modulator,lm_ratio,temp_c,time_h";

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

// Positive decimal integer of at most 9 digits, or nullopt.
std::optional<int> positive_int(std::string_view s) {
  s = trim(s);
  if (!all_digits(s) || s.size() > 9) return std::nullopt;
  int v = std::stoi(std::string(s));
  if (v <= 0) return std::nullopt;
  return v;
}

int integer_field(std::string_view value, std::string_view name) {
  auto v = positive_int(value);
  if (!v) throw Error(ErrorCode::NonIntegerField, std::string(name) + " = \"" + std::string(trim(value)) + "\"");
  return *v;
}

// "p:q" with both sides positive integers.
std::optional<std::pair<int, int>> parse_pair(std::string_view text) {
  text = trim(text);
  auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto a = positive_int(text.substr(0, colon));
  auto b = positive_int(text.substr(colon + 1));
  if (!a || !b) return std::nullopt;
  return std::make_pair(*a, *b);
}

std::vector<Modulator> parse_modulators(std::string_view text, const ModulatorVocabulary& vocabulary) {
  text = trim(text);
  std::string_view names = text;
  std::optional<std::vector<int>> parts;
  if (auto open = text.find('('); open != std::string_view::npos) {
    auto close = text.find(')', open);
    if (close == std::string_view::npos || !trim(text.substr(close + 1)).empty()) {
      throw Error(ErrorCode::UnknownModulatorCode, "unbalanced parentheses in \"" + std::string(text) + "\"");
    }
    names = trim(text.substr(0, open));
    std::vector<int> ps;
    std::string_view inner = text.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    while (true) {
      auto colon = inner.find(':', start);
      auto p = positive_int(inner.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
      if (!p) throw Error(ErrorCode::BadRatio, "modulator parts \"" + std::string(inner) + "\"");
      ps.push_back(*p);
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    parts = std::move(ps);
  }

  std::vector<Modulator> out;
  std::size_t start = 0;
  while (true) {
    auto slash = names.find('/', start);
    std::string name(trim(names.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start)));
    if (vocabulary.find(name) == vocabulary.end()) throw Error(ErrorCode::UnknownModulatorCode, name);
    out.push_back({std::move(name), 1});
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }

  if (parts) {
    if (parts->size() != out.size()) {
      throw Error(ErrorCode::BadRatio, std::to_string(out.size()) + " modulators but " +
                                           std::to_string(parts->size()) + " parts");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].parts = (*parts)[i];
  } else if (out.size() > 1) {
    throw Error(ErrorCode::BadRatio, "modulator mixture without parts: \"" + std::string(text) + "\"");
  }
  return out;
}

}  // namespace

const ModulatorVocabulary& default_modulator_vocabulary() {
  static const ModulatorVocabulary kVocabulary = {"FA", "TFA", "AA", "BA", "HCl", "H2O"};
  return kVocabulary;
}

ScreeningRecord parse_screening_row(const std::vector<std::string>& fields, const ModulatorVocabulary& vocabulary) {
  if (fields.size() != 6) {
    throw Error(ErrorCode::InvalidArgument, "expected 6 fields, got " + std::to_string(fields.size()));
  }
  std::vector<std::string> f;
  for (const auto& field : fields) f.emplace_back(trim(normalize_subscripts(field)));

  ScreeningRecord r;
  if (f[1].empty()) throw Error(ErrorCode::InvalidArgument, "empty linker code");
  r.linker = f[1];
  r.modulators = parse_modulators(f[2], vocabulary);
  auto ratio = parse_pair(f[3]);
  if (!ratio) throw Error(ErrorCode::BadRatio, "lm_ratio \"" + f[3] + "\"");
  r.lm_ratio = {ratio->first, ratio->second};
  r.exp_id = integer_field(f[0], "exp_id");
  r.temp_c = integer_field(f[4], "temp_c");
  r.time_h = integer_field(f[5], "time_h");
  return r;
}

ScreeningRecord parse_screening_row(std::string_view csv_line, const ModulatorVocabulary& vocabulary) {
  return parse_screening_row(split_csv_line(csv_line), vocabulary);
}

std::vector<ScreeningRecord> load_screening_csv(const std::string& path, const ModulatorVocabulary& vocabulary) {
  std::string text = read_file(path);
  auto lines = split_lines(text);
  if (lines.empty() || trim(lines[0]) != kHeader) {
    throw Error(ErrorCode::InvalidArgument, path + ": expected header \"" + std::string(kHeader) + "\"");
  }
  std::vector<ScreeningRecord> records;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    try {
      records.push_back(parse_screening_row(lines[i], vocabulary));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(i + 1) + ": " + e.detail());
    }
  }
  return records;
}

std::string format_modulators(const std::vector<Modulator>& modulators) {
  std::string names;
  std::string parts;
  for (std::size_t i = 0; i < modulators.size(); ++i) {
    if (i > 0) {
      names += "/";
      parts += ":";
    }
    names += modulators[i].name;
    parts += std::to_string(modulators[i].parts);
  }
  return modulators.size() > 1 ? names + " (" + parts + ")" : names;
}

std::string format_ratio(LmRatio ratio) {
  return std::to_string(ratio.linker_parts) + ":" + std::to_string(ratio.metal_parts);
}

const LinkerSummary* DatasetSummary::find(std::string_view linker) const {
  for (const auto& l : linkers) {
    if (l.linker == linker) return &l;
  }
  return nullptr;
}

DatasetSummary dataset_summary(const std::vector<ScreeningRecord>& records) {
  std::set<int> seen;
  DatasetSummary out;
  for (const auto& r : records) {
    if (!seen.insert(r.exp_id).second) throw Error(ErrorCode::DuplicateExpId, std::to_string(r.exp_id));
    auto it = std::find_if(out.linkers.begin(), out.linkers.end(),
                           [&](const LinkerSummary& l) { return l.linker == r.linker; });
    if (it == out.linkers.end()) {
      out.linkers.push_back({r.linker, 1, r.temp_c, r.temp_c, r.time_h, r.time_h});
    } else {
      ++it->count;
      it->temp_min = std::min(it->temp_min, r.temp_c);
      it->temp_max = std::max(it->temp_max, r.temp_c);
      it->time_min = std::min(it->time_min, r.time_h);
      it->time_max = std::max(it->time_max, r.time_h);
    }
    ++out.total;
  }
  return out;
}

std::vector<int> subset_mismatches(const std::vector<ScreeningRecord>& subset,
                                   const std::vector<ScreeningRecord>& full) {
  std::map<int, const ScreeningRecord*> by_id;
  for (const auto& r : full) by_id.emplace(r.exp_id, &r);
  std::vector<int> out;
  for (const auto& r : subset) {
    auto it = by_id.find(r.exp_id);
    if (it == by_id.end() || !(*it->second == r)) out.push_back(r.exp_id);
  }
  return out;
}

std::vector<std::string> changed_parameters(const ScreeningRecord& a, const ScreeningRecord& b) {
  std::vector<std::string> out;
  if (a.modulators != b.modulators) out.emplace_back("modulator");
  if (a.lm_ratio != b.lm_ratio) out.emplace_back("lm_ratio");
  if (a.temp_c != b.temp_c) out.emplace_back("temp");
  if (a.time_h != b.time_h) out.emplace_back("time");
  return out;
}

std::vector<ParameterDiff> parameter_diff_report(const std::vector<ScreeningRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ScreeningRecord*>> groups;
  for (const auto& r : records) {
    auto& g = groups[r.linker];
    if (g.empty()) order.push_back(r.linker);
    g.push_back(&r);
  }
  std::vector<ParameterDiff> out;
  for (const auto& linker : order) {
    auto& g = groups[linker];
    std::stable_sort(g.begin(), g.end(), [](auto* x, auto* y) { return x->exp_id < y->exp_id; });
    for (std::size_t i = 1; i < g.size(); ++i) {
      out.push_back({linker, g[i - 1]->exp_id, g[i]->exp_id, changed_parameters(*g[i - 1], *g[i])});
    }
  }
  return out;
}

StageIterations iteration_stats(const std::vector<StageCursor>& trajectory, int stage_count) {
  StageIterations out;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const StageCursor c = trajectory[i];
    bool ok = false;
    if (i == 0) {
      ok = c == StageCursor{1, 1};
    } else {
      const StageCursor p = trajectory[i - 1];
      ok = (c.stage == p.stage && c.iteration == p.iteration + 1) || (c.stage == p.stage + 1 && c.iteration == 1);
    }
    if (!ok) {
      throw Error(ErrorCode::NonMonotonicTrajectory,
                  "position " + std::to_string(i + 1) + ": " + format_cursor(c) +
                      (i == 0 ? " (must start at 1-1)" : " after " + format_cursor(trajectory[i - 1])));
    }
    if (static_cast<int>(out.per_stage.size()) < c.stage) out.per_stage.resize(static_cast<std::size_t>(c.stage), 0);
    auto& slot = out.per_stage[static_cast<std::size_t>(c.stage - 1)];
    slot = std::max(slot, c.iteration);
  }
  if (static_cast<int>(out.per_stage.size()) < stage_count) out.per_stage.resize(static_cast<std::size_t>(stage_count), 0);
  for (int n : out.per_stage) out.total += n;
  return out;
}

std::string format_iteration_table(const std::vector<CampaignIterations>& rows) {
  std::size_t stages = 0;
  std::size_t name_width = 8;
  for (const auto& r : rows) {
    stages = std::max(stages, r.stats.per_stage.size());
    name_width = std::max(name_width, r.campaign.size());
  }
  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  std::string name_header = "Campaign";
  name_header.resize(name_width, ' ');
  out << name_header;
  for (std::size_t s = 0; s < stages; ++s) out << pad("S" + std::to_string(s + 1), 5);
  out << pad("Total", 7) << "\n";
  for (const auto& r : rows) {
    std::string name = r.campaign;
    name.resize(name_width, ' ');
    out << name;
    for (std::size_t s = 0; s < stages; ++s) {
      int n = s < r.stats.per_stage.size() ? r.stats.per_stage[s] : 0;
      out << pad(std::to_string(n), 5);
    }
    out << pad(std::to_string(r.stats.total), 7) << "\n";
  }
  return out.str();
}

json to_json_value(const ScreeningRecord& v) {
  json mods = json::array();
  for (const auto& m : v.modulators) mods.push_back({{"name", m.name}, {"parts", m.parts}});
  return {{"exp_id", v.exp_id},
          {"linker", v.linker},
          {"modulators", mods},
          {"lm_ratio", {{"linker_parts", v.lm_ratio.linker_parts}, {"metal_parts", v.lm_ratio.metal_parts}}},
          {"temp_c", v.temp_c},
          {"time_h", v.time_h}};
}

json to_json_value(const DatasetSummary& v) {
  json linkers = json::array();
  for (const auto& l : v.linkers) {
    linkers.push_back({{"linker", l.linker},
                       {"count", l.count},
                       {"temp_c", {l.temp_min, l.temp_max}},
                       {"time_h", {l.time_min, l.time_max}}});
  }
  return {{"total", v.total}, {"linkers", linkers}};
}

json to_json_value(const ParameterDiff& v) {
  return {{"linker", v.linker},
          {"from_exp", v.from_exp},
          {"to_exp", v.to_exp},
          {"changed", v.changed},
          {"multi_param_change", v.multi_param_change()}};
}

json to_json_value(const StageIterations& v) { return {{"per_stage", v.per_stage}, {"total", v.total}}; }

json to_json_value(const std::vector<CampaignIterations>& v) {
  json out = json::array();
  for (const auto& r : v) {
    json row = to_json_value(r.stats);
    row["campaign"] = r.campaign;
    out.push_back(row);
  }
  return out;
}

}  // namespace labloop
