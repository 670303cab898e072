#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wealthflow/error.hpp"
#include "wealthflow/rank_stats.hpp"

using namespace wealthflow;
using Ranks = std::vector<std::int64_t>;

namespace {

Ranks permutation(std::size_t m, std::mt19937_64& gen) {
  Ranks r(m);
  std::iota(r.begin(), r.end(), 1);
  std::shuffle(r.begin(), r.end(), gen);
  return r;
}

Ranks reversed(const Ranks& r) {
  const auto m = static_cast<std::int64_t>(r.size());
  Ranks out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = m + 1 - r[i];
  return out;
}

RankingSnapshot snapshot_of(const std::vector<Identity>& ids_by_rank, std::int64_t t = 0) {
  RankingSnapshot s;
  s.time_label = t;
  for (std::size_t i = 0; i < ids_by_rank.size(); ++i) {
    s.entries.push_back({ids_by_rank[i], static_cast<std::int64_t>(i + 1), false});
  }
  return s;
}

std::vector<Identity> ranks_as_vector(const RankingSnapshot& s) {
  std::vector<Identity> out(s.entries.size());
  for (const auto& e : s.entries) out[e.identity] = static_cast<Identity>(e.rank);
  return out;
}

}  // namespace

TEST(KendallTau, IdenticalAndReversed) {
  const Ranks x{3, 1, 4, 2, 5};
  EXPECT_EQ(kendall_tau({x, x}), 1.0);
  EXPECT_EQ(kendall_tau({x, reversed(x)}), -1.0);
}

TEST(KendallTau, FourItemExample) {
  EXPECT_DOUBLE_EQ(kendall_tau({{1, 2, 3, 4}, {2, 1, 4, 3}}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(oracle::kendall_tau({1, 2, 3, 4}, {2, 1, 4, 3}), 1.0 / 3.0);
}

TEST(KendallTau, Errors) {
  EXPECT_THROW(kendall_tau({{1}, {1}}), ValidationError);
  EXPECT_THROW(kendall_tau({{1, 1, 2}, {1, 2, 3}}), ValidationError);
  EXPECT_THROW(RankPairSample({1, 2}, {1, 2, 3}), ValidationError);
}

TEST(SpearmanRho, Examples) {
  EXPECT_EQ(spearman_rho({{2, 3, 1}, {2, 3, 1}}), 1.0);
  EXPECT_EQ(spearman_rho({{1, 2, 3}, {3, 2, 1}}), -1.0);
  EXPECT_THROW(spearman_rho({{1, 2, 2}, {3, 2, 1}}), ValidationError);
}

TEST(SpearmanRho, NullMeanIsZero) {
  std::mt19937_64 gen(31);
  std::vector<double> values;
  for (int d = 0; d < 100; ++d) values.push_back(spearman_rho({permutation(1000, gen), permutation(1000, gen)}));
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / 100.0;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(var / 99.0 / 100.0));
}

TEST(GoodmanKruskal, TieExamples) {
  EXPECT_EQ(goodman_kruskal_gamma({{1, 2, 3, 4}, {1, 2, 5, 5}, true}), 1.0);
  EXPECT_EQ(goodman_kruskal_gamma({{1, 1, 2}, {1, 2, 3}, true}), 1.0);
  EXPECT_EQ(goodman_kruskal_gamma({{1, 2, 3}, {3, 2, 2}, true}), -1.0);
  EXPECT_THROW(goodman_kruskal_gamma({{1, 1}, {1, 2}, true}), NumericError);
  EXPECT_THROW(goodman_kruskal_gamma({{4}, {1}, true}), ValidationError);
}

TEST(GoodmanKruskal, RandomTiesMatchEnumeration) {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 2 + trial % 120;
    std::uniform_int_distribution<std::int64_t> pick(1, 1 + static_cast<std::int64_t>(m / 3));
    Ranks x(m), y(m);
    for (auto& v : x) v = pick(gen);
    for (auto& v : y) v = pick(gen);
    const auto c = oracle::count_pairs(x, y);
    if (c.concordant + c.discordant == 0) continue;
    EXPECT_DOUBLE_EQ(goodman_kruskal_gamma({x, y, true}), oracle::goodman_kruskal_gamma(x, y)) << trial;
  }
}

TEST(RankOracles, RandomPermutationsUpTo300) {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(gen() % 299);
    const Ranks x = permutation(m, gen);
    const Ranks y = permutation(m, gen);
    const RankPairSample s(x, y);
    ASSERT_EQ(kendall_tau(s), oracle::kendall_tau(x, y)) << "m=" << m;
    ASSERT_EQ(spearman_rho(s), oracle::spearman_rho(x, y));
    ASSERT_NEAR(spearman_rho(s), oracle::pearson(x, y), 1e-12);
    ASSERT_EQ(goodman_kruskal_gamma(s), kendall_tau(s));
  }
}

TEST(ScoreCorrelation, SignIsKendallIdentityIsSpearman) {
  std::mt19937_64 gen(34);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(gen() % 150);
    const RankPairSample s(permutation(m, gen), permutation(m, gen));
    const double sign = score_correlation(s, [](double d) { return static_cast<double>((d > 0) - (d < 0)); });
    EXPECT_NEAR(sign, kendall_tau(s), 1e-12);
    EXPECT_NEAR(score_correlation(s, [](double d) { return d; }), spearman_rho(s), 1e-12);
  }
  const Ranks x{4, 2, 1, 3};
  EXPECT_NEAR(score_correlation({x, x}, [](double d) { return d * d * d; }), 1.0, 1e-15);
}

TEST(RankProperties, AntisymmetryAndSymmetry) {
  std::mt19937_64 gen(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(gen() % 400);
    const Ranks x = permutation(m, gen), y = permutation(m, gen);
    const RankPairSample s(x, y), r(x, reversed(y)), t(y, x);
    EXPECT_EQ(kendall_tau(r), -kendall_tau(s));
    EXPECT_EQ(spearman_rho(r), -spearman_rho(s));
    EXPECT_EQ(kendall_tau(t), kendall_tau(s));
    EXPECT_EQ(spearman_rho(t), spearman_rho(s));
    EXPECT_EQ(goodman_kruskal_gamma(t), goodman_kruskal_gamma(s));
  }
}

TEST(RankProperties, MonotoneRelabelingOfScores) {
  std::mt19937_64 gen(36);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    WealthSnapshot a{0, {}, {}}, b{1, {}, {}};
    for (int i = 0; i < 250; ++i) {
      a.wealth.push_back(std::exp(nd(gen)));
      b.wealth.push_back(std::exp(nd(gen)));
    }
    auto map = [](WealthSnapshot s) {
      for (auto& w : s.wealth) w = std::log1p(w) * 3.0 + w * w * w;
      return s;
    };
    const auto ra = ranks_from_wealth(a), rb = ranks_from_wealth(b);
    const auto ma = ranks_from_wealth(map(a)), mb = ranks_from_wealth(map(b));
    const auto s = align(ra, rb), t = align(ma, mb);
    EXPECT_EQ(kendall_tau(s), kendall_tau(t));
    EXPECT_EQ(spearman_rho(s), spearman_rho(t));
    EXPECT_EQ(goodman_kruskal_gamma(s), goodman_kruskal_gamma(t));
    EXPECT_EQ(overlap_ratio(ra, rb, 25), overlap_ratio(ma, mb, 25));
  }
}

TEST(Overlap, Examples) {
  std::vector<Identity> a(200), b(200);
  std::iota(a.begin(), a.end(), 0);
  const auto sa = snapshot_of(a);
  EXPECT_EQ(overlap_ratio(sa, sa, 100), 1.0);
  // b: ids 100..199 first, then 0..99
  for (std::size_t i = 0; i < 200; ++i) b[i] = (i + 100) % 200;
  EXPECT_EQ(overlap_ratio(sa, snapshot_of(b), 100), 0.0);
  // 50 shared ids in the top 100
  for (std::size_t i = 0; i < 200; ++i) b[i] = (i + 50) % 200;
  EXPECT_EQ(overlap_ratio(sa, snapshot_of(b), 100), 0.5);
  EXPECT_THROW(overlap_ratio(sa, sa, 201), ValidationError);
  EXPECT_THROW(overlap_ratio(sa, sa, 0), ValidationError);
}

TEST(Overlap, ValuesOnTheLattice) {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Identity> a(60), b(60);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::shuffle(a.begin(), a.end(), gen);
    std::shuffle(b.begin(), b.end(), gen);
    const std::size_t n = 1 + trial % 30;
    const double o = overlap_ratio(snapshot_of(a), snapshot_of(b), n);
    const double scaled = o * static_cast<double>(n);
    EXPECT_EQ(scaled, std::round(scaled));
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0);
    EXPECT_EQ(o, overlap_ratio(snapshot_of(b), snapshot_of(a), n));
  }
}

TEST(MeanOverlapSeries, TwoSnapshotsAndRepeats) {
  std::mt19937_64 gen(38);
  std::vector<Identity> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  std::shuffle(b.begin(), b.end(), gen);
  const std::vector<RankingSnapshot> two{snapshot_of(a, 0), snapshot_of(b, 1)};
  const auto s2 = mean_overlap_series(two, 10);
  ASSERT_EQ(s2.size(), 2u);
  EXPECT_EQ(s2[0], 1.0);
  EXPECT_EQ(s2[1], overlap_ratio(two[0], two[1], 10));
  const std::vector<RankingSnapshot> same(7, snapshot_of(b));
  for (double v : mean_overlap_series(same, 10)) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(mean_overlap_series(std::span(two).first(1), 10), ValidationError);
}

TEST(MeanOverlapSeries, MatchesDirectAverage) {
  std::mt19937_64 gen(39);
  std::vector<RankingSnapshot> snaps;
  std::vector<Identity> ids(80);
  std::iota(ids.begin(), ids.end(), 0);
  for (int t = 0; t < 12; ++t) {
    // partial reshuffle keeps some memory between snapshots
    std::shuffle(ids.begin() + 5, ids.begin() + 40, gen);
    std::swap(ids[gen() % 80], ids[gen() % 80]);
    snaps.push_back(snapshot_of(ids, t));
  }
  const auto series = mean_overlap_series(snaps, 20);
  for (std::size_t k = 1; k < snaps.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j + k < snaps.size(); ++j) acc += overlap_ratio(snaps[j], snaps[j + k], 20);
    EXPECT_NEAR(series[k], acc / static_cast<double>(snaps.size() - k), 1e-15);
  }
}

TEST(RanksFromWealth, Examples) {
  EXPECT_EQ(ranks_as_vector(ranks_from_wealth({0, {3.0, 1.0, 2.0}, {}})), (std::vector<Identity>{1, 3, 2}));
  EXPECT_EQ(ranks_as_vector(ranks_from_wealth({0, {1.0, 1.0}, {}})), (std::vector<Identity>{1, 2}));
  const auto cold = ranks_from_wealth({0, std::vector<double>(9, 1.0), {}});
  const auto v = ranks_as_vector(cold);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i + 1);
  EXPECT_EQ(rank_by_agent(std::vector<double>{3.0, 1.0, 2.0}), (std::vector<std::int32_t>{1, 3, 2}));
  EXPECT_THROW(ranks_from_wealth({0, {1.0, std::nan("")}, {}}), ValidationError);
}

TEST(RankingSnapshot, Validation) {
  RankingSnapshot s = snapshot_of({5, 7, 9});
  EXPECT_NO_THROW(s.validate());
  EXPECT_FALSE(s.has_ties());
  s.entries[1].rank = 1;
  EXPECT_THROW(s.validate(), ValidationError);
  s.entries[0].tied = s.entries[1].tied = true;
  s.entries[0].rank = s.entries[1].rank = 2;
  s.entries[2].rank = 1;
  EXPECT_NO_THROW(s.validate());
  EXPECT_TRUE(s.has_ties());
  RankingSnapshot dup = snapshot_of({5, 5});
  EXPECT_THROW(dup.validate(), ValidationError);
}

TEST(Align, ByIdentity) {
  const auto a = snapshot_of({10, 20, 30});
  const auto b = snapshot_of({30, 10, 20});
  const auto s = align(a, b);
  EXPECT_EQ(s.ranks_x, (Ranks{1, 2, 3}));
  EXPECT_EQ(s.ranks_y, (Ranks{2, 3, 1}));
  EXPECT_THROW(align(a, snapshot_of({10, 20, 40})), ValidationError);
  EXPECT_THROW(align(a, snapshot_of({10, 20})), ValidationError);
}
