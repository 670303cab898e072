#include "wealthflow/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "wealthflow/error.hpp"

namespace wealthflow {
namespace {

using Ranks = std::vector<std::int64_t>;

void require_pairs(const RankPairSample& s, const char* where) {
  if (s.size() < 2) throw ValidationError(std::string(where) + ": need at least two items");
}

// True when `r` is a permutation of 1..M; fills the inverse (position of rank).
bool inverse_permutation(const Ranks& r, std::vector<std::size_t>& inverse) {
  const std::size_t m = r.size();
  inverse.assign(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::int64_t v = r[i];
    if (v < 1 || v > static_cast<std::int64_t>(m)) return false;
    auto& slot = inverse[static_cast<std::size_t>(v - 1)];
    if (slot != m) return false;
    slot = i;
  }
  return true;
}

bool has_duplicates(const Ranks& r) {
  Ranks sorted = r;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

// Number of pairs i < j with seq[i] > seq[j]; sorts seq as a side effect.
std::int64_t count_inversions(Ranks& seq) {
  Ranks buffer(seq.size());
  std::int64_t inversions = 0;
  for (std::size_t width = 1; width < seq.size(); width *= 2) {
    for (std::size_t lo = 0; lo < seq.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, seq.size());
      const std::size_t hi = std::min(lo + 2 * width, seq.size());
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t out = lo;
      while (i < mid && j < hi) {
        if (seq[j] < seq[i]) {
          inversions += static_cast<std::int64_t>(mid - i);
          buffer[out++] = seq[j++];
        } else {
          buffer[out++] = seq[i++];
        }
      }
      while (i < mid) buffer[out++] = seq[i++];
      while (j < hi) buffer[out++] = seq[j++];
    }
    std::swap(seq, buffer);
  }
  return inversions;
}

// Σ t(t-1)/2 over runs of equal values in a sorted range.
template <typename It, typename Eq>
std::int64_t tied_pairs(It first, It last, Eq eq) {
  std::int64_t pairs = 0;
  while (first != last) {
    It run_end = std::next(first);
    while (run_end != last && eq(*first, *run_end)) ++run_end;
    const auto t = static_cast<std::int64_t>(std::distance(first, run_end));
    pairs += t * (t - 1) / 2;
    first = run_end;
  }
  return pairs;
}

struct PairCounts {
  std::int64_t concordant;
  std::int64_t discordant;
};

// Knight's algorithm: concordant and discordant counts with ties excluded.
PairCounts count_pairs(const RankPairSample& s) {
  const std::size_t m = s.size();
  const auto& x = s.ranks_x;
  const auto& y = s.ranks_y;
  Ranks seq(m);
  std::int64_t ties_x = 0;
  std::int64_t ties_xy = 0;
  std::vector<std::size_t> inverse;
  if (inverse_permutation(x, inverse)) {
    for (std::size_t r = 0; r < m; ++r) seq[r] = y[inverse[r]];
  } else {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
    });
    ties_x = tied_pairs(order.begin(), order.end(),
                        [&](std::size_t a, std::size_t b) { return x[a] == x[b]; });
    ties_xy = tied_pairs(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x[a] == x[b] && y[a] == y[b];
    });
    for (std::size_t r = 0; r < m; ++r) seq[r] = y[order[r]];
  }
  const std::int64_t discordant = count_inversions(seq);  // seq is now sorted
  const std::int64_t ties_y =
      tied_pairs(seq.begin(), seq.end(), [](std::int64_t a, std::int64_t b) { return a == b; });
  const auto mm = static_cast<std::int64_t>(m);
  const std::int64_t all_pairs = mm * (mm - 1) / 2;
  return {all_pairs - ties_x - ties_y + ties_xy - discordant, discordant};
}

void require_no_ties(const RankPairSample& s, const char* where) {
  std::vector<std::size_t> scratch;
  const bool x_ok = inverse_permutation(s.ranks_x, scratch) || !has_duplicates(s.ranks_x);
  const bool y_ok = inverse_permutation(s.ranks_y, scratch) || !has_duplicates(s.ranks_y);
  if (!x_ok || !y_ok) throw ValidationError(std::string(where) + ": tied ranks present");
}

// Dense ranks 1..M of a tie-free vector, preserving order.
Ranks dense_ranks(const Ranks& r) {
  std::vector<std::size_t> scratch;
  if (inverse_permutation(r, scratch)) return r;
  std::vector<std::size_t> order(r.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  Ranks dense(r.size());
  for (std::size_t i = 0; i < order.size(); ++i) dense[order[i]] = static_cast<std::int64_t>(i + 1);
  return dense;
}

}  // namespace

bool RankingSnapshot::has_ties() const {
  return std::any_of(entries.begin(), entries.end(), [](const RankEntry& e) { return e.tied; });
}

void RankingSnapshot::validate() const {
  std::unordered_set<Identity> seen;
  seen.reserve(entries.size());
  for (const auto& e : entries) {
    if (!seen.insert(e.identity).second) {
      throw ValidationError("snapshot " + std::to_string(time_label) + ": identity " +
                            std::to_string(e.identity) + " appears twice");
    }
    if (e.rank < 1) throw ValidationError("snapshot " + std::to_string(time_label) + ": rank < 1");
  }
  std::unordered_map<std::int64_t, int> untied_at;
  for (const auto& e : entries) {
    if (!e.tied && untied_at[e.rank]++ > 0) {
      throw ValidationError("snapshot " + std::to_string(time_label) + ": rank " +
                            std::to_string(e.rank) + " repeated without a tie flag");
    }
  }
  if (!has_ties()) {
    Ranks r;
    r.reserve(entries.size());
    for (const auto& e : entries) r.push_back(e.rank);
    std::vector<std::size_t> scratch;
    if (!inverse_permutation(r, scratch)) {
      throw ValidationError("snapshot " + std::to_string(time_label) +
                            ": untied ranks must be a permutation of 1..M");
    }
  }
}

RankPairSample::RankPairSample(std::vector<std::int64_t> x, std::vector<std::int64_t> y, bool ties)
    : ranks_x(std::move(x)), ranks_y(std::move(y)), allow_ties(ties) {
  if (ranks_x.size() != ranks_y.size()) {
    throw ValidationError("rank sample: rankings have different lengths");
  }
}

RankPairSample align(const RankingSnapshot& a, const RankingSnapshot& b) {
  if (a.entries.size() != b.entries.size()) {
    throw ValidationError("align: snapshots rank different numbers of identities");
  }
  std::unordered_map<Identity, std::int64_t> rank_in_b;
  rank_in_b.reserve(b.entries.size());
  for (const auto& e : b.entries) rank_in_b.emplace(e.identity, e.rank);
  Ranks x;
  Ranks y;
  x.reserve(a.entries.size());
  y.reserve(a.entries.size());
  for (const auto& e : a.entries) {
    const auto it = rank_in_b.find(e.identity);
    if (it == rank_in_b.end()) {
      throw ValidationError("align: identity " + std::to_string(e.identity) +
                            " missing from the second snapshot");
    }
    x.push_back(e.rank);
    y.push_back(it->second);
  }
  return RankPairSample(std::move(x), std::move(y), a.has_ties() || b.has_ties());
}

double kendall_tau(const RankPairSample& sample) {
  require_pairs(sample, "kendall_tau");
  require_no_ties(sample, "kendall_tau");
  const auto [nc, nd] = count_pairs(sample);
  const auto m = static_cast<double>(sample.size());
  return 2.0 * static_cast<double>(nc - nd) / (m * (m - 1.0));
}

double spearman_rho(const RankPairSample& sample) {
  require_pairs(sample, "spearman_rho");
  require_no_ties(sample, "spearman_rho");
  const Ranks x = dense_ranks(sample.ranks_x);
  const Ranks y = dense_ranks(sample.ranks_y);
  std::int64_t sum_sq = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::int64_t d = x[i] - y[i];
    sum_sq += d * d;
  }
  const auto mi = static_cast<std::int64_t>(sample.size());
  if (mi <= 1'000'000) {
    // integer numerator, so reversing a ranking negates rho exactly
    const std::int64_t denom = mi * (mi * mi - 1);
    return static_cast<double>(denom - 6 * sum_sq) / static_cast<double>(denom);
  }
  const auto m = static_cast<double>(sample.size());
  return 1.0 - 6.0 * static_cast<double>(sum_sq) / (m * (m * m - 1.0));
}

double goodman_kruskal_gamma(const RankPairSample& sample) {
  require_pairs(sample, "goodman_kruskal_gamma");
  const auto [nc, nd] = count_pairs(sample);
  if (nc + nd == 0) {
    throw NumericError("goodman_kruskal_gamma: every pair is tied, gamma is undefined");
  }
  return static_cast<double>(nc - nd) / static_cast<double>(nc + nd);
}

double score_correlation(const RankPairSample& sample, const std::function<double(double)>& score) {
  require_pairs(sample, "score_correlation");
  const auto& r = sample.ranks_x;
  const auto& s = sample.ranks_y;
  double cross = 0.0;
  double norm_r = 0.0;
  double norm_s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const double fr = score(static_cast<double>(r[i] - r[j]));
      const double fs = score(static_cast<double>(s[i] - s[j]));
      cross += fr * fs;
      norm_r += fr * fr;
      norm_s += fs * fs;
    }
  }
  if (norm_r == 0.0 || norm_s == 0.0) {
    throw NumericError("score_correlation: constant ranking gives a zero denominator");
  }
  return cross / (std::sqrt(norm_r) * std::sqrt(norm_s));
}

std::vector<Identity> top_identities(const RankingSnapshot& snapshot, std::size_t n) {
  if (n == 0) throw ValidationError("top-n overlap needs n >= 1");
  if (n > snapshot.entries.size()) {
    throw ValidationError("top-" + std::to_string(n) + " exceeds snapshot size " +
                          std::to_string(snapshot.entries.size()));
  }
  std::vector<Identity> top;
  top.reserve(n);
  for (const auto& e : snapshot.entries) {
    if (e.rank <= static_cast<std::int64_t>(n)) top.push_back(e.identity);
  }
  if (top.size() != n) {
    throw ValidationError("snapshot " + std::to_string(snapshot.time_label) + ": " +
                          std::to_string(top.size()) + " identities hold ranks 1.." +
                          std::to_string(n));
  }
  std::sort(top.begin(), top.end());
  return top;
}

std::size_t intersection_size(std::span<const Identity> a, std::span<const Identity> b) {
  std::size_t count = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double overlap_ratio(const RankingSnapshot& a, const RankingSnapshot& b, std::size_t n) {
  const auto ta = top_identities(a, n);
  const auto tb = top_identities(b, n);
  return static_cast<double>(intersection_size(ta, tb)) / static_cast<double>(n);
}

std::vector<double> mean_overlap_series(std::span<const RankingSnapshot> snapshots, std::size_t n) {
  const std::size_t count = snapshots.size();
  if (count < 2) throw ValidationError("mean_overlap_series: need at least two snapshots");
  std::vector<std::vector<Identity>> tops;
  tops.reserve(count);
  for (const auto& s : snapshots) tops.push_back(top_identities(s, n));
  std::vector<double> series(count, 0.0);
  series[0] = 1.0;
  for (std::size_t lag = 1; lag < count; ++lag) {
    double sum = 0.0;
    for (std::size_t j = 0; j + lag < count; ++j) {
      sum += static_cast<double>(intersection_size(tops[j], tops[j + lag]));
    }
    series[lag] = sum / (static_cast<double>(n) * static_cast<double>(count - lag));
  }
  return series;
}

namespace {

std::vector<std::int32_t> richest_first_order(std::span<const double> wealth) {
  for (double w : wealth) {
    if (!std::isfinite(w)) throw ValidationError("ranking: wealth entries must be finite");
  }
  std::vector<std::int32_t> order(wealth.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    return wealth[a] != wealth[b] ? wealth[a] > wealth[b] : a < b;
  });
  return order;
}

}  // namespace

std::vector<std::int32_t> rank_by_agent(std::span<const double> wealth) {
  const auto order = richest_first_order(wealth);
  std::vector<std::int32_t> rank(wealth.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<std::int32_t>(i + 1);
  return rank;
}

RankingSnapshot ranks_from_wealth(const WealthSnapshot& snapshot) {
  const auto rank = rank_by_agent(snapshot.wealth);
  RankingSnapshot out;
  out.time_label = static_cast<std::int64_t>(snapshot.time_index);
  out.entries.reserve(rank.size());
  for (std::size_t a = 0; a < rank.size(); ++a) {
    out.entries.push_back({static_cast<Identity>(a), rank[a], false});
  }
  return out;
}

}  // namespace wealthflow
