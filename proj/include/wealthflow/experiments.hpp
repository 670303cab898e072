#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "wealthflow/rank_stats.hpp"
#include "wealthflow/sim_engine.hpp"
#include "wealthflow/timeseries.hpp"

namespace wealthflow {

/// Per-lag averages of rank statistics over a stream of snapshots.
///
/// Overlap pairs use every snapshot as a base, which reproduces the mean
/// overlap estimator exactly. Kendall/Spearman/Goodman-Kruskal pairs are
/// restricted to base snapshots whose index is a multiple of
/// `rank_base_every`, because each evaluation costs O(N log N).
class LagCorrelator {
 public:
  struct Plan {
    std::vector<std::size_t> lags;  // in snapshots, ascending, > 0
    std::size_t top_n = 100;
    std::size_t rank_base_every = 1;
    bool rank_statistics = true;
  };

  struct LagEstimate {
    std::size_t lag;  // in snapshots
    double tau;
    double rho;
    double gamma;
    double omega;
    std::size_t rank_pairs;
    std::size_t overlap_pairs;
  };

  explicit LagCorrelator(Plan plan);

  void push(std::span<const double> wealth);
  std::size_t snapshots_seen() const { return seen_; }
  // Lag 0 first (all coefficients one), then the planned lags.
  std::vector<LagEstimate> estimates() const;

 private:
  struct Frame {
    std::size_t index;
    std::vector<std::int64_t> ranks;  // by agent
    std::vector<Identity> top;        // identity-sorted
  };
  struct Sums {
    double tau = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    double overlap = 0.0;
    std::size_t rank_pairs = 0;
    std::size_t overlap_pairs = 0;
  };

  Plan plan_;
  std::size_t max_lag_;
  std::deque<Frame> window_;
  std::vector<Sums> sums_;
  std::size_t seen_ = 0;
};

struct CorrelationRow {
  std::uint64_t k;  // lag in evolution steps
  double x_tau_rho;
  double x_overlap;
  double tau;
  double rho;
  double gamma;
  double omega;
};

struct CorrelationSeries {
  double alpha;
  double sigma;
  std::size_t top_n;
  std::uint64_t snapshot_stride;  // steps between snapshots
  std::size_t snapshots;
  std::vector<CorrelationRow> rows;
};

/// Measurement protocol in units of rescaled time s = k sigma^2, so one
/// protocol covers configurations with different sigma at equal physical
/// duration.
struct StationaryProtocol {
  double burn_in = 10.0;
  double duration = 100.0;
  double snapshot_spacing = 0.05;
  double max_lag = 6.0;
  std::size_t top_n = 100;
  std::size_t rank_bases = 100;
};

// Evolution steps corresponding to rescaled time s, at least one.
std::uint64_t steps_for(double rescaled_time, double sigma);

/// Burns in from the configured start, then streams snapshots through a
/// LagCorrelator. Lags cover every snapshot multiple up to max_lag.
CorrelationSeries stationary_correlations(const SimConfig& config,
                                          const StationaryProtocol& protocol);

// Rows with k < min_lag are left out; min_lag = 1 drops the trivial k = 0 point.
LagCurve tau_curve(const CorrelationSeries& series, std::uint64_t min_lag = 0);
LagCurve rho_curve(const CorrelationSeries& series, std::uint64_t min_lag = 0);
LagCurve omega_curve(const CorrelationSeries& series, std::uint64_t min_lag = 0);

struct GiniPoint {
  std::uint64_t k;
  double k_sigma2;
  double gini;
};

// Empirical Gini at every snapshot of the configured run.
std::vector<GiniPoint> gini_trace(const SimConfig& config);

/// Gini series of `length` samples taken every `stride` steps after
/// `burn_in` steps from the configured start.
ScalarSeries gini_series(const SimConfig& config, std::uint64_t burn_in, std::uint64_t stride,
                         std::size_t length);

}  // namespace wealthflow
