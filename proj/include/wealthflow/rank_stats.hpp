#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wealthflow/sim_engine.hpp"

namespace wealthflow {

using Identity = std::uint64_t;

struct RankEntry {
  Identity identity;
  std::int64_t rank;
  bool tied = false;
};

/// Ranking at one time label. Ties are only legal between entries whose
/// `tied` flag is set; without any flagged entry the ranks must be a
/// permutation of 1..M.
struct RankingSnapshot {
  std::int64_t time_label = 0;
  std::vector<RankEntry> entries;

  bool has_ties() const;
  void validate() const;
};

/// Two rankings of the same M items, aligned by identity.
struct RankPairSample {
  std::vector<std::int64_t> ranks_x;
  std::vector<std::int64_t> ranks_y;
  bool allow_ties = false;

  RankPairSample(std::vector<std::int64_t> x, std::vector<std::int64_t> y, bool ties = false);
  std::size_t size() const { return ranks_x.size(); }
};

// Aligns two snapshots over the same identity set (ValidationError otherwise).
RankPairSample align(const RankingSnapshot& a, const RankingSnapshot& b);

// 2 (Nc - Nd) / (M (M - 1)) by merge-sort inversion counting, O(M log M).
double kendall_tau(const RankPairSample& sample);

// 1 - 6 Σ d^2 / (M (M^2 - 1)) on the dense ranks 1..M.
double spearman_rho(const RankPairSample& sample);

/// (Nc - Nd) / (Nc + Nd); pairs tied in either coordinate count in neither.
/// O(M log M) via tie-corrected inversion counting. Throws NumericError when
/// every pair is tied.
double goodman_kruskal_gamma(const RankPairSample& sample);

/// Σ f(r_i - r_j) f(s_i - s_j) / sqrt(Σ f^2(r_i - r_j) Σ f^2(s_i - s_j)) over
/// ordered pairs, for an odd monotone score f. O(M^2); a reference for the
/// closed forms above.
double score_correlation(const RankPairSample& sample, const std::function<double(double)>& score);

// |T_n(a) ∩ T_n(b)| / n where T_n holds the identities ranked 1..n.
double overlap_ratio(const RankingSnapshot& a, const RankingSnapshot& b, std::size_t n);

// Identities ranked 1..n, sorted by identity.
std::vector<Identity> top_identities(const RankingSnapshot& snapshot, std::size_t n);

// Size of the intersection of two identity-sorted sets.
std::size_t intersection_size(std::span<const Identity> a, std::span<const Identity> b);

/// Mean overlap over all snapshot pairs at each lag:
///   Ω̄_n(k) = 1/(K-k) Σ_j Ω_n(j, j+k),  k = 0..K-1, with Ω̄_n(0) = 1.
/// Assumes uniformly spaced, time-homogeneous snapshots.
std::vector<double> mean_overlap_series(std::span<const RankingSnapshot> snapshots, std::size_t n);

/// Rank 1 for the largest wealth; equal wealth is broken by agent id
/// ascending. Identity is the agent index.
RankingSnapshot ranks_from_wealth(const WealthSnapshot& snapshot);

// Rank of each agent (1-based) under the same ordering, indexed by agent.
std::vector<std::int32_t> rank_by_agent(std::span<const double> wealth);

}  // namespace wealthflow
