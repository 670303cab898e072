#include "wealthflow/data_pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "wealthflow/error.hpp"
#include "wealthflow/rng.hpp"

namespace wealthflow {
namespace {

// Splits one CSV line; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string strip_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  // UTF-8 byte order mark
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  return line;
}

std::int64_t parse_int(const std::string& text, std::size_t line_no, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string normalize_person_id(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (const char ch : raw) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  return out;
}

std::vector<RichListRecord> read_richlist_csv(std::istream& in, const AliasMap* aliases) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("rich list: empty input");
  const auto header = split_csv_line(strip_line(line));
  if (header.size() != 3 || trim(header[0]) != "year" || trim(header[1]) != "rank" ||
      trim(header[2]) != "name") {
    throw ValidationError("rich list: expected header 'year,rank,name'");
  }
  std::vector<RichListRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_line(line);
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 3 fields");
    }
    RichListRecord rec{static_cast<int>(parse_int(trim(f[0]), line_no, "year")),
                       parse_int(trim(f[1]), line_no, "rank"), normalize_person_id(f[2])};
    if (rec.person_id.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty name");
    }
    if (aliases) {
      const auto it = aliases->find(rec.person_id);
      if (it != aliases->end()) rec.person_id = it->second;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

AliasMap read_alias_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("alias map: empty input");
  const auto header = split_csv_line(strip_line(line));
  if (header.size() != 2 || trim(header[0]) != "alias" || trim(header[1]) != "canonical") {
    throw ValidationError("alias map: expected header 'alias,canonical'");
  }
  AliasMap map;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_line(line);
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw ValidationError("line " + std::to_string(line_no) + ": expected 2 fields");
    map[normalize_person_id(f[0])] = normalize_person_id(f[1]);
  }
  return map;
}

AnnualLists ingest(const std::vector<RichListRecord>& records) {
  std::map<int, std::map<std::int64_t, std::string>> by_year;
  for (const auto& rec : records) {
    const std::string person = normalize_person_id(rec.person_id);
    if (person.empty()) throw ValidationError("year " + std::to_string(rec.year) + ": empty name");
    if (rec.rank < 1) {
      throw ValidationError("year " + std::to_string(rec.year) + ": rank " +
                            std::to_string(rec.rank) + " is below 1");
    }
    auto& year = by_year[rec.year];
    if (!year.emplace(rec.rank, person).second) {
      throw ValidationError("year " + std::to_string(rec.year) + ": duplicate rank " +
                            std::to_string(rec.rank));
    }
  }
  AnnualLists lists;
  for (auto& [year, ranked] : by_year) {
    std::vector<std::string> ordered;
    std::unordered_set<std::string> seen;
    std::int64_t expected = 1;
    for (auto& [rank, person] : ranked) {
      if (rank != expected) {
        throw ValidationError("year " + std::to_string(year) + ": rank " +
                              std::to_string(expected) + " missing (gap before rank " +
                              std::to_string(rank) + ")");
      }
      if (!seen.insert(person).second) {
        throw ValidationError("year " + std::to_string(year) + ": '" + person +
                              "' listed more than once");
      }
      ordered.push_back(person);
      ++expected;
    }
    lists.emplace(year, std::move(ordered));
  }
  return lists;
}

Identity FullSet::identity_of(const std::string& person) const {
  const auto it = std::lower_bound(persons.begin(), persons.end(), person);
  if (it == persons.end() || *it != person) {
    throw ValidationError("'" + person + "' is not in the full set");
  }
  return static_cast<Identity>(it - persons.begin());
}

FullSet build_full_set(const AnnualLists& lists) {
  if (lists.empty()) throw ValidationError("build_full_set: no annual lists");
  std::set<std::string> all;
  for (const auto& [year, list] : lists) all.insert(list.begin(), list.end());
  return FullSet{std::vector<std::string>(all.begin(), all.end())};
}

std::string to_string(CompletionMode mode) {
  return mode == CompletionMode::RandomUnique ? "random-unique" : "ex-aequo";
}

StandardizedPanel standardize(const AnnualLists& lists, const FullSet& full_set,
                              CompletionMode mode, std::uint64_t seed) {
  StandardizedPanel panel{mode, seed, {}, {}, {}};
  const std::size_t m = full_set.size();
  for (const auto& [year, list] : lists) {
    std::vector<std::int64_t> rank(m, 0);
    for (std::size_t i = 0; i < list.size(); ++i) {
      rank[full_set.identity_of(list[i])] = static_cast<std::int64_t>(i + 1);
    }
    const auto n = static_cast<std::int64_t>(list.size());
    std::vector<std::size_t> absent;
    for (std::size_t id = 0; id < m; ++id) {
      if (rank[id] == 0) absent.push_back(id);
    }
    RankingSnapshot snap;
    snap.time_label = year;
    if (mode == CompletionMode::RandomUnique) {
      std::vector<std::int64_t> fill(absent.size());
      std::iota(fill.begin(), fill.end(), n + 1);
      Rng rng(seed, static_cast<std::uint64_t>(year));
      std::shuffle(fill.begin(), fill.end(), rng.engine());
      for (std::size_t i = 0; i < absent.size(); ++i) rank[absent[i]] = fill[i];
    }
    snap.entries.reserve(m);
    for (std::size_t id = 0; id < m; ++id) {
      const bool completed = rank[id] == 0;
      snap.entries.push_back({static_cast<Identity>(id), completed ? n + 1 : rank[id],
                              completed && mode == CompletionMode::ExAequo});
    }
    panel.years.push_back(year);
    panel.snapshots.push_back(std::move(snap));
    panel.list_sizes.push_back(list.size());
  }
  return panel;
}

namespace {

std::size_t year_index(const StandardizedPanel& panel, int year) {
  const auto it = std::find(panel.years.begin(), panel.years.end(), year);
  if (it == panel.years.end()) {
    throw ValidationError("base year " + std::to_string(year) + " is not in the panel");
  }
  return static_cast<std::size_t>(it - panel.years.begin());
}

}  // namespace

std::vector<PanelPoint> panel_correlations(const StandardizedPanel& panel, int base_year) {
  const auto& base = panel.snapshots[year_index(panel, base_year)];
  const double nan = std::nan("");
  std::vector<PanelPoint> out;
  for (std::size_t y = 0; y < panel.years.size(); ++y) {
    const auto sample = align(base, panel.snapshots[y]);
    PanelPoint p{base_year, panel.years[y], nan, nan, nan};
    if (panel.mode == CompletionMode::RandomUnique) {
      p.tau = kendall_tau(sample);
      p.rho = spearman_rho(sample);
    } else {
      p.gamma = goodman_kruskal_gamma(sample);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<RankingSnapshot> raw_rankings(const AnnualLists& lists, const FullSet& full_set) {
  std::vector<RankingSnapshot> out;
  for (const auto& [year, list] : lists) {
    RankingSnapshot snap;
    snap.time_label = year;
    for (std::size_t i = 0; i < list.size(); ++i) {
      snap.entries.push_back({full_set.identity_of(list[i]), static_cast<std::int64_t>(i + 1), false});
    }
    out.push_back(std::move(snap));
  }
  return out;
}

std::vector<RichListRow> richlist_correlations(const AnnualLists& lists, int base_year,
                                               const RichListOptions& opts) {
  if (opts.completion_seeds == 0) throw ValidationError("need at least one completion seed");
  const FullSet full = build_full_set(lists);
  if (!lists.contains(base_year)) {
    throw ValidationError("base year " + std::to_string(base_year) + " is not in the data");
  }
  std::size_t top_n = opts.top_n;
  if (top_n == 0) {
    top_n = std::min_element(lists.begin(), lists.end(), [](const auto& a, const auto& b) {
              return a.second.size() < b.second.size();
            })->second.size();
  }

  const auto years = lists.size();
  std::vector<double> tau_sum(years, 0.0), tau_sq(years, 0.0), rho_sum(years, 0.0),
      rho_sq(years, 0.0);
  for (std::size_t r = 0; r < opts.completion_seeds; ++r) {
    const auto panel = standardize(lists, full, CompletionMode::RandomUnique, derive_seed(opts.seed, r));
    const auto points = panel_correlations(panel, base_year);
    for (std::size_t y = 0; y < years; ++y) {
      tau_sum[y] += points[y].tau;
      tau_sq[y] += points[y].tau * points[y].tau;
      rho_sum[y] += points[y].rho;
      rho_sq[y] += points[y].rho * points[y].rho;
    }
  }
  const auto gammas = panel_correlations(standardize(lists, full, CompletionMode::ExAequo), base_year);
  const auto raw = raw_rankings(lists, full);
  const auto base_it = std::find_if(raw.begin(), raw.end(),
                                    [&](const RankingSnapshot& s) { return s.time_label == base_year; });

  const auto reps = static_cast<double>(opts.completion_seeds);
  auto sd = [&](double sum, double sq) {
    if (opts.completion_seeds < 2) return 0.0;
    const double mean = sum / reps;
    return std::sqrt(std::max(0.0, (sq - reps * mean * mean) / (reps - 1.0)));
  };
  std::vector<RichListRow> rows;
  for (std::size_t y = 0; y < years; ++y) {
    rows.push_back({base_year, gammas[y].target_year, tau_sum[y] / reps, rho_sum[y] / reps,
                    gammas[y].gamma, overlap_ratio(*base_it, raw[y], top_n), sd(tau_sum[y], tau_sq[y]),
                    sd(rho_sum[y], rho_sq[y])});
  }
  return rows;
}

}  // namespace wealthflow
