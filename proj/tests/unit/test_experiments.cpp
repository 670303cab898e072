#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wealthflow/error.hpp"
#include "wealthflow/experiments.hpp"

using namespace wealthflow;

namespace {

std::vector<std::vector<double>> hot_snapshots(std::size_t n, std::size_t count, std::uint64_t stride) {
  SimConfig c;
  c.n_agents = n;
  c.sigma = 0.1;
  c.alpha = 2.0;
  c.seed = 51;
  auto e = init_hot(c);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i > 0) {
      for (std::uint64_t k = 0; k < stride; ++k) step(e, c);
    }
    out.emplace_back(e.wealth().begin(), e.wealth().end());
  }
  return out;
}

std::vector<std::int64_t> ranks_of(const std::vector<double>& w) {
  const auto r = rank_by_agent(w);
  return {r.begin(), r.end()};
}

}  // namespace

TEST(LagCorrelator, OverlapMatchesMeanOverlapSeries) {
  const auto snaps = hot_snapshots(400, 15, 20);
  LagCorrelator::Plan plan;
  for (std::size_t l = 1; l < snaps.size(); ++l) plan.lags.push_back(l);
  plan.top_n = 30;
  plan.rank_statistics = false;
  LagCorrelator corr(plan);
  std::vector<RankingSnapshot> rankings;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    corr.push(snaps[i]);
    auto r = ranks_from_wealth({i, snaps[i], {}});
    r.time_label = static_cast<std::int64_t>(i);
    rankings.push_back(std::move(r));
  }
  const auto series = mean_overlap_series(rankings, 30);
  const auto est = corr.estimates();
  ASSERT_EQ(est.size(), series.size());
  for (std::size_t k = 0; k < est.size(); ++k) {
    EXPECT_EQ(est[k].lag, k);
    EXPECT_NEAR(est[k].omega, series[k], 1e-15) << k;
    EXPECT_TRUE(k == 0 || std::isnan(est[k].tau));
  }
}

TEST(LagCorrelator, RankStatisticsOverSelectedBases) {
  const auto snaps = hot_snapshots(150, 12, 30);
  LagCorrelator::Plan plan{{1, 2, 4}, 10, 3, true};
  LagCorrelator corr(plan);
  for (const auto& s : snaps) corr.push(s);
  const auto est = corr.estimates();
  ASSERT_EQ(est.size(), 4u);
  for (std::size_t i = 1; i < est.size(); ++i) {
    const std::size_t lag = est[i].lag;
    double tau = 0.0, rho = 0.0;
    std::size_t pairs = 0;
    for (std::size_t b = 0; b + lag < snaps.size(); b += 3) {
      const auto x = ranks_of(snaps[b]), y = ranks_of(snaps[b + lag]);
      tau += oracle::kendall_tau(x, y);
      rho += oracle::pearson(x, y);
      ++pairs;
    }
    EXPECT_EQ(est[i].rank_pairs, pairs);
    EXPECT_EQ(est[i].overlap_pairs, snaps.size() - lag);
    EXPECT_NEAR(est[i].tau, tau / static_cast<double>(pairs), 1e-14);
    EXPECT_NEAR(est[i].rho, rho / static_cast<double>(pairs), 1e-12);
    EXPECT_EQ(est[i].gamma, est[i].tau);
  }
}

TEST(LagCorrelator, Validation) {
  EXPECT_THROW(LagCorrelator({{}, 10, 1, true}), ValidationError);
  EXPECT_THROW(LagCorrelator({{0, 1}, 10, 1, true}), ValidationError);
  EXPECT_THROW(LagCorrelator({{3, 2}, 10, 1, true}), ValidationError);
  EXPECT_THROW(LagCorrelator({{1}, 10, 0, true}), ValidationError);
  LagCorrelator c({{1}, 10, 1, true});
  EXPECT_THROW(c.push(std::vector<double>(5, 1.0)), ValidationError);
  c.push(std::vector<double>(20, 1.0));
  EXPECT_THROW(c.push(std::vector<double>(21, 1.0)), ValidationError);
  EXPECT_EQ(c.estimates().size(), 1u);
}

TEST(StepsFor, RoundsAndFloorsAtOne) {
  EXPECT_EQ(steps_for(1.0, 0.1), 100u);
  EXPECT_EQ(steps_for(0.05, 0.08), 8u);
  EXPECT_EQ(steps_for(1e-9, 0.1), 1u);
}

TEST(StationaryCorrelations, RowsAndAbscissae) {
  SimConfig c;
  c.n_agents = 500;
  c.sigma = 0.1;
  c.alpha = 3.0;
  c.seed = 52;
  StationaryProtocol p;
  p.burn_in = 1.0;
  p.duration = 6.0;
  p.snapshot_spacing = 0.1;
  p.max_lag = 2.0;
  p.top_n = 25;
  p.rank_bases = 10;
  const auto s = stationary_correlations(c, p);
  EXPECT_EQ(s.snapshot_stride, 10u);
  EXPECT_EQ(s.snapshots, 61u);
  ASSERT_EQ(s.rows.size(), 21u);
  EXPECT_EQ(s.rows[0].tau, 1.0);
  EXPECT_EQ(s.rows[0].omega, 1.0);
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    EXPECT_EQ(s.rows[i].k, 10 * i);
    EXPECT_NEAR(s.rows[i].x_tau_rho, static_cast<double>(10 * i) * 3.0 * 0.01, 1e-12);
    EXPECT_NEAR(s.rows[i].x_overlap, static_cast<double>(10 * i) * 2.0 * 0.01, 1e-12);
  }
  EXPECT_LT(s.rows.back().tau, s.rows[1].tau);
  EXPECT_LT(s.rows.back().omega, s.rows[1].omega);
  EXPECT_LT(s.rows[1].tau, 1.0);

  const auto full = tau_curve(s), trimmed = rho_curve(s, 1);
  EXPECT_EQ(full.lags.size(), 21u);
  EXPECT_EQ(trimmed.lags.size(), 20u);
  EXPECT_EQ(trimmed.lags.front(), 10.0);
  EXPECT_EQ(omega_curve(s).values.front(), 1.0);

  const auto again = stationary_correlations(c, p);
  EXPECT_EQ(again.rows.back().tau, s.rows.back().tau);

  p.max_lag = 7.0;
  EXPECT_THROW(stationary_correlations(c, p), ValidationError);
}

TEST(GiniTrace, CadenceAndRescaledTime) {
  SimConfig c;
  c.n_agents = 100;
  c.sigma = 0.2;
  c.alpha = 2.0;
  c.start = StartMode::Cold;
  c.steps = 30;
  c.snapshot_every = 10;
  const auto trace = gini_trace(c);
  ASSERT_EQ(trace.size(), 4u);
  EXPECT_EQ(trace[0].gini, 0.0);
  EXPECT_NEAR(trace[3].k_sigma2, 30 * 0.04, 1e-12);
  EXPECT_GT(trace[3].gini, 0.0);
}

TEST(GiniSeries, LengthAndStride) {
  SimConfig c;
  c.n_agents = 100;
  const auto s = gini_series(c, 5, 3, 17);
  EXPECT_EQ(s.values.size(), 17u);
  EXPECT_EQ(s.step_stride, 3u);
  EXPECT_THROW(gini_series(c, 0, 0, 5), ValidationError);
}
