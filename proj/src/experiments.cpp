#include "wealthflow/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "wealthflow/dist_analytics.hpp"
#include "wealthflow/error.hpp"

namespace wealthflow {

LagCorrelator::LagCorrelator(Plan plan) : plan_(std::move(plan)) {
  if (plan_.lags.empty()) throw ValidationError("LagCorrelator: no lags requested");
  if (!std::is_sorted(plan_.lags.begin(), plan_.lags.end()) || plan_.lags.front() == 0) {
    throw ValidationError("LagCorrelator: lags must be positive and ascending");
  }
  if (plan_.rank_base_every == 0) throw ValidationError("LagCorrelator: rank_base_every is zero");
  max_lag_ = plan_.lags.back();
  sums_.resize(plan_.lags.size());
}

void LagCorrelator::push(std::span<const double> wealth) {
  if (plan_.top_n == 0 || plan_.top_n > wealth.size()) {
    throw ValidationError("LagCorrelator: top_n must lie in [1, N]");
  }
  if (!window_.empty() && window_.back().ranks.size() != wealth.size()) {
    throw ValidationError("LagCorrelator: snapshot size changed");
  }
  const auto rank32 = rank_by_agent(wealth);
  Frame frame{seen_, std::vector<std::int64_t>(rank32.begin(), rank32.end()), {}};
  frame.top.reserve(plan_.top_n);
  for (std::size_t a = 0; a < rank32.size(); ++a) {
    if (rank32[a] <= static_cast<std::int32_t>(plan_.top_n)) frame.top.push_back(a);
  }

  for (std::size_t i = 0; i < plan_.lags.size(); ++i) {
    const std::size_t lag = plan_.lags[i];
    if (lag > seen_) break;
    const Frame& older = window_[window_.size() - lag];
    auto& s = sums_[i];
    s.overlap += static_cast<double>(intersection_size(older.top, frame.top)) /
                 static_cast<double>(plan_.top_n);
    ++s.overlap_pairs;
    if (plan_.rank_statistics && older.index % plan_.rank_base_every == 0) {
      const RankPairSample pair(older.ranks, frame.ranks);
      s.tau += kendall_tau(pair);
      s.rho += spearman_rho(pair);
      s.gamma += goodman_kruskal_gamma(pair);
      ++s.rank_pairs;
    }
  }

  window_.push_back(std::move(frame));
  if (window_.size() > max_lag_) window_.pop_front();
  ++seen_;
}

std::vector<LagCorrelator::LagEstimate> LagCorrelator::estimates() const {
  std::vector<LagEstimate> out;
  out.push_back({0, 1.0, 1.0, 1.0, 1.0, seen_, seen_});
  for (std::size_t i = 0; i < plan_.lags.size(); ++i) {
    const auto& s = sums_[i];
    if (s.overlap_pairs == 0) break;
    const double nr = static_cast<double>(s.rank_pairs);
    const double nan = std::nan("");
    out.push_back({plan_.lags[i], s.rank_pairs ? s.tau / nr : nan, s.rank_pairs ? s.rho / nr : nan,
                   s.rank_pairs ? s.gamma / nr : nan,
                   s.overlap / static_cast<double>(s.overlap_pairs), s.rank_pairs,
                   s.overlap_pairs});
  }
  return out;
}

std::uint64_t steps_for(double rescaled_time, double sigma) {
  const double steps = std::round(rescaled_time / (sigma * sigma));
  return steps < 1.0 ? 1 : static_cast<std::uint64_t>(steps);
}

CorrelationSeries stationary_correlations(const SimConfig& config,
                                          const StationaryProtocol& protocol) {
  config.validate();
  if (!(protocol.duration > protocol.max_lag) || !(protocol.snapshot_spacing > 0.0)) {
    throw ValidationError("correlation protocol: need duration > max_lag and spacing > 0");
  }
  const double s2 = config.sigma * config.sigma;
  const std::uint64_t stride = steps_for(protocol.snapshot_spacing, config.sigma);
  const double spacing = static_cast<double>(stride) * s2;
  // the small slack keeps 6.0 / 0.1 from truncating to 59
  const auto snapshots = static_cast<std::size_t>(std::floor(protocol.duration / spacing + 1e-9)) + 1;
  const auto max_lag = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(protocol.max_lag / spacing)));
  if (max_lag >= snapshots) throw ValidationError("correlation protocol: max_lag exceeds duration");

  LagCorrelator::Plan plan;
  for (std::size_t l = 1; l <= max_lag; ++l) plan.lags.push_back(l);
  plan.top_n = protocol.top_n;
  plan.rank_statistics = protocol.rank_bases > 0;
  plan.rank_base_every =
      std::max<std::size_t>(1, (snapshots - max_lag) / std::max<std::size_t>(1, protocol.rank_bases));
  LagCorrelator correlator(std::move(plan));

  auto ensemble = init_ensemble(config);
  const std::uint64_t burn = protocol.burn_in > 0.0 ? steps_for(protocol.burn_in, config.sigma) : 0;
  for (std::uint64_t k = 0; k < burn; ++k) step(ensemble, config);
  for (std::size_t i = 0; i < snapshots; ++i) {
    if (i > 0) {
      for (std::uint64_t k = 0; k < stride; ++k) step(ensemble, config);
    }
    correlator.push(ensemble.wealth());
  }

  CorrelationSeries series{config.alpha, config.sigma, protocol.top_n, stride, snapshots, {}};
  for (const auto& e : correlator.estimates()) {
    const std::uint64_t k = e.lag * stride;
    const auto kd = static_cast<double>(k);
    series.rows.push_back({k, rescaled_lag(kd, config.alpha, config.sigma, ScalingConvention::TauRho),
                           rescaled_lag(kd, config.alpha, config.sigma, ScalingConvention::Overlap),
                           e.tau, e.rho, e.gamma, e.omega});
  }
  return series;
}

namespace {

template <typename Field>
LagCurve curve_of(const CorrelationSeries& series, std::uint64_t min_lag, const char* what,
                  Field field) {
  LagCurve c{std::string(what), series.alpha, series.sigma, {}, {}};
  for (const auto& row : series.rows) {
    const double v = field(row);
    if (row.k < min_lag || std::isnan(v)) continue;
    c.lags.push_back(static_cast<double>(row.k));
    c.values.push_back(v);
  }
  return c;
}

}  // namespace

LagCurve tau_curve(const CorrelationSeries& s, std::uint64_t min_lag) {
  return curve_of(s, min_lag, "tau", [](const CorrelationRow& r) { return r.tau; });
}
LagCurve rho_curve(const CorrelationSeries& s, std::uint64_t min_lag) {
  return curve_of(s, min_lag, "rho", [](const CorrelationRow& r) { return r.rho; });
}
LagCurve omega_curve(const CorrelationSeries& s, std::uint64_t min_lag) {
  return curve_of(s, min_lag, "omega", [](const CorrelationRow& r) { return r.omega; });
}

std::vector<GiniPoint> gini_trace(const SimConfig& config) {
  std::vector<GiniPoint> trace;
  std::vector<double> sorted(config.n_agents);
  const double s2 = config.sigma * config.sigma;
  run_streaming(config, [&](const AgentEnsemble& e) {
    std::copy(e.wealth().begin(), e.wealth().end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    trace.push_back({e.time_index(), static_cast<double>(e.time_index()) * s2, gini_of_sorted(sorted)});
  });
  return trace;
}

ScalarSeries gini_series(const SimConfig& config, std::uint64_t burn_in, std::uint64_t stride,
                         std::size_t length) {
  if (stride == 0) throw ValidationError("gini_series: stride must be positive");
  auto ensemble = init_ensemble(config);
  for (std::uint64_t k = 0; k < burn_in; ++k) step(ensemble, config);
  ScalarSeries series{{}, stride};
  series.values.reserve(length);
  std::vector<double> sorted(ensemble.size());
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) {
      for (std::uint64_t k = 0; k < stride; ++k) step(ensemble, config);
    }
    std::copy(ensemble.wealth().begin(), ensemble.wealth().end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    series.values.push_back(gini_of_sorted(sorted));
  }
  return series;
}

}  // namespace wealthflow
