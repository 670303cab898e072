#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wealthflow/rng.hpp"

namespace wealthflow {

enum class StartMode { Cold, Hot };

std::string to_string(StartMode mode);
StartMode parse_start_mode(const std::string& text);

/// One simulation run. sigma and flow_rate are per-step quantities; the engine
/// has no notion of the physical time increment.
struct SimConfig {
  std::size_t n_agents = 10000;
  double sigma = 0.08;
  double alpha = 2.0;
  // Derived as sigma^2 (alpha - 1) / 2 when absent.
  std::optional<double> flow_rate;
  double mu = 0.0;
  StartMode start = StartMode::Hot;
  std::uint64_t seed = 1;
  std::uint64_t steps = 0;
  std::uint64_t snapshot_every = 1;

  double flow() const;
  // Throws ValidationError describing the first violated invariant.
  void validate() const;
};

// alpha = 1 + 2 j / sigma^2.
double pareto_index(double flow_rate, double sigma);
// j = sigma^2 (alpha - 1) / 2.
double flow_rate_for(double alpha, double sigma);

class AgentEnsemble {
 public:
  AgentEnsemble(std::vector<double> wealth, Rng rng);

  std::span<const double> wealth() const { return wealth_; }
  std::span<double> mutable_wealth() { return wealth_; }
  std::size_t size() const { return wealth_.size(); }
  std::uint64_t time_index() const { return time_index_; }
  // Natural log of the power-of-two factor divided out to keep the mean in range.
  double log_scale() const { return log_scale_; }
  double mean() const;
  Rng& rng() { return rng_; }

 private:
  friend void step(AgentEnsemble&, const SimConfig&);
  friend void step_with_growth(AgentEnsemble&, const SimConfig&, std::span<const double>);

  std::vector<double> wealth_;
  std::uint64_t time_index_ = 0;
  Rng rng_;
  double log_scale_ = 0.0;
};

struct WealthSnapshot {
  std::uint64_t time_index;
  std::vector<double> wealth;
  std::vector<double> normalized;
};

WealthSnapshot take_snapshot(const AgentEnsemble& ensemble);

// out_a = W_a / mean(W); out may alias wealth.
void normalize_wealth(std::span<const double> wealth, std::span<double> out);

AgentEnsemble init_cold(const SimConfig& config);
AgentEnsemble init_hot(const SimConfig& config);
AgentEnsemble init_ensemble(const SimConfig& config);

// Growth sub-step W <- exp(r) W.
void apply_growth(std::span<double> wealth, std::span<const double> log_growth);
// Mean-field flow sub-step W <- (1 - j) W + (j / N) sum(W); preserves the total.
void apply_flow(std::span<double> wealth, double flow_rate);

/// One full step: N growth rates r ~ Normal(mu, sigma^2) drawn in agent order,
/// then the flow sub-step. Throws NumericError naming k if any entry leaves the
/// representable range.
void step(AgentEnsemble& ensemble, const SimConfig& config);

// Same step with externally supplied growth rates instead of random draws.
void step_with_growth(AgentEnsemble& ensemble, const SimConfig& config,
                      std::span<const double> log_growth);

using SnapshotObserver = std::function<void(const AgentEnsemble&)>;

/// Advances `steps` steps and calls `observer` at k = 0 (relative to the
/// ensemble's current time) and after every `every` steps.
void evolve(AgentEnsemble& ensemble, const SimConfig& config, std::uint64_t steps,
            std::uint64_t every, const SnapshotObserver& observer);

// Streams the configured run (start, steps, snapshot cadence) to `observer`.
void run_streaming(const SimConfig& config, const SnapshotObserver& observer);

std::vector<WealthSnapshot> run(const SimConfig& config);

}  // namespace wealthflow
