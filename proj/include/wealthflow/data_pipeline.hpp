#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wealthflow/rank_stats.hpp"

namespace wealthflow {

struct RichListRecord {
  int year;
  std::int64_t rank;
  std::string person_id;
};

// Optional entity resolution: normalized alias -> normalized canonical key.
using AliasMap = std::unordered_map<std::string, std::string>;

// Trim, collapse internal whitespace, ASCII case fold.
std::string normalize_person_id(std::string_view raw);

// CSV with header `year,rank,name`. Names may be double-quoted.
std::vector<RichListRecord> read_richlist_csv(std::istream& in, const AliasMap* aliases = nullptr);

// CSV with header `alias,canonical`.
AliasMap read_alias_csv(std::istream& in);

// year -> person ids ordered by rank (index 0 holds rank 1).
using AnnualLists = std::map<int, std::vector<std::string>>;

/// Groups records by year and validates each list: ranks 1..n exactly once,
/// no person twice in a year. Person ids are normalized here.
AnnualLists ingest(const std::vector<RichListRecord>& records);

/// Every person present on at least one annual list. Identity of a person in
/// rank snapshots is their index in `persons` (sorted).
struct FullSet {
  std::vector<std::string> persons;

  std::size_t size() const { return persons.size(); }
  Identity identity_of(const std::string& person) const;
};

FullSet build_full_set(const AnnualLists& lists);

enum class CompletionMode { RandomUnique, ExAequo };

std::string to_string(CompletionMode mode);

/// Each year's list completed to the full set:
///  - RandomUnique: absent persons get a seeded random permutation of ranks
///    n+1..M (seeded per year from `seed`),
///  - ExAequo: absent persons all share rank n+1, flagged tied.
struct StandardizedPanel {
  CompletionMode mode;
  std::uint64_t seed;
  std::vector<int> years;
  std::vector<RankingSnapshot> snapshots;  // one per year, entries in identity order
  std::vector<std::size_t> list_sizes;     // n per year
};

StandardizedPanel standardize(const AnnualLists& lists, const FullSet& full_set,
                              CompletionMode mode, std::uint64_t seed = 0);

/// Coefficients of each year against `base_year`. RandomUnique panels fill
/// tau and rho, ExAequo panels fill gamma; the other fields are NaN.
struct PanelPoint {
  int base_year;
  int target_year;
  double tau;
  double rho;
  double gamma;
};

std::vector<PanelPoint> panel_correlations(const StandardizedPanel& panel, int base_year);

struct RichListRow {
  int base_year;
  int target_year;
  double tau;
  double rho;
  double gamma;
  double overlap;
  double tau_sd;  // over completion seeds; 0 for a single seed
  double rho_sd;
};

struct RichListOptions {
  std::uint64_t seed = 1;
  std::size_t completion_seeds = 1;
  // 0: smallest annual list length.
  std::size_t top_n = 0;
};

/// The full real-data procedure: both completions, tau and rho averaged over
/// `completion_seeds` RandomUnique panels, gamma from the ExAequo panel and
/// the raw top-n overlap of each year with the base year.
std::vector<RichListRow> richlist_correlations(const AnnualLists& lists, int base_year,
                                               const RichListOptions& opts = {});

// Raw (uncompleted) rankings of the annual lists, identities from the full set.
std::vector<RankingSnapshot> raw_rankings(const AnnualLists& lists, const FullSet& full_set);

}  // namespace wealthflow
