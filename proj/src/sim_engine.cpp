#include "wealthflow/sim_engine.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "wealthflow/dist_analytics.hpp"
#include "wealthflow/error.hpp"

namespace wealthflow {
namespace {

// Mean wealth is kept within [2^-kScaleExponent, 2^kScaleExponent] by exact
// power-of-two rescaling, so normalized wealth is bit-identical either way.
constexpr int kScaleExponent = 500;

constexpr double kConsistencyTolerance = 1e-12;

void rescale_if_needed(std::vector<double>& wealth, double& log_scale, double total) {
  const double mean = total / static_cast<double>(wealth.size());
  const int e = std::ilogb(mean);
  if (e > kScaleExponent || e < -kScaleExponent) {
    for (double& w : wealth) w = std::ldexp(w, -e);
    log_scale += e * std::log(2.0);
  }
}

void check_finite(double total, std::uint64_t k) {
  if (!std::isfinite(total) || !(total > 0.0)) {
    throw NumericError("step " + std::to_string(k) +
                       ": wealth left the representable range (check mu, sigma, steps)");
  }
}

}  // namespace

std::string to_string(StartMode mode) { return mode == StartMode::Cold ? "cold" : "hot"; }

StartMode parse_start_mode(const std::string& text) {
  if (text == "cold" || text == "Cold") return StartMode::Cold;
  if (text == "hot" || text == "Hot") return StartMode::Hot;
  throw ValidationError("start must be 'cold' or 'hot', got '" + text + "'");
}

double pareto_index(double flow_rate, double sigma) { return 1.0 + 2.0 * flow_rate / (sigma * sigma); }

double flow_rate_for(double alpha, double sigma) { return sigma * sigma * (alpha - 1.0) / 2.0; }

double SimConfig::flow() const { return flow_rate ? *flow_rate : flow_rate_for(alpha, sigma); }

void SimConfig::validate() const {
  if (n_agents == 0) throw ValidationError("n_agents must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be positive");
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be >= 1");
  if (!std::isfinite(mu)) throw ValidationError("mu must be finite");
  if (snapshot_every == 0) throw ValidationError("snapshot_every must be positive");
  const double j = flow();
  if (!(j >= 0.0 && j < 1.0)) {
    throw ValidationError("flow_rate must lie in [0, 1), got " + std::to_string(j));
  }
  if (flow_rate) {
    const double implied = pareto_index(*flow_rate, sigma);
    if (std::abs(implied - alpha) > kConsistencyTolerance * alpha) {
      throw ValidationError("alpha, sigma and flow_rate are inconsistent: 1 + 2j/sigma^2 = " +
                            std::to_string(implied) + " but alpha = " + std::to_string(alpha));
    }
  }
}

AgentEnsemble::AgentEnsemble(std::vector<double> wealth, Rng rng)
    : wealth_(std::move(wealth)), rng_(std::move(rng)) {
  if (wealth_.empty()) throw ValidationError("ensemble needs at least one agent");
  for (double w : wealth_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("ensemble wealth must be positive and finite");
    }
  }
}

double AgentEnsemble::mean() const {
  return std::accumulate(wealth_.begin(), wealth_.end(), 0.0) / static_cast<double>(wealth_.size());
}

void normalize_wealth(std::span<const double> wealth, std::span<double> out) {
  const double mean =
      std::accumulate(wealth.begin(), wealth.end(), 0.0) / static_cast<double>(wealth.size());
  for (std::size_t a = 0; a < wealth.size(); ++a) out[a] = wealth[a] / mean;
}

WealthSnapshot take_snapshot(const AgentEnsemble& ensemble) {
  WealthSnapshot snap{ensemble.time_index(),
                      std::vector<double>(ensemble.wealth().begin(), ensemble.wealth().end()),
                      std::vector<double>(ensemble.size())};
  normalize_wealth(snap.wealth, snap.normalized);
  return snap;
}

AgentEnsemble init_cold(const SimConfig& config) {
  config.validate();
  return AgentEnsemble(std::vector<double>(config.n_agents, 1.0), Rng(config.seed));
}

AgentEnsemble init_hot(const SimConfig& config) {
  config.validate();
  if (!(config.alpha > 1.0)) {
    throw ValidationError("hot start needs alpha > 1 (stationary mean undefined otherwise)");
  }
  Rng rng(config.seed);
  auto wealth = sample_inverse_gamma(InverseGammaLaw(config.alpha), config.n_agents, rng);
  return AgentEnsemble(std::move(wealth), std::move(rng));
}

AgentEnsemble init_ensemble(const SimConfig& config) {
  return config.start == StartMode::Cold ? init_cold(config) : init_hot(config);
}

void apply_growth(std::span<double> wealth, std::span<const double> log_growth) {
  if (wealth.size() != log_growth.size()) {
    throw ValidationError("apply_growth: one growth rate per agent required");
  }
  for (std::size_t a = 0; a < wealth.size(); ++a) wealth[a] *= std::exp(log_growth[a]);
}

void apply_flow(std::span<double> wealth, double flow_rate) {
  const double total = std::accumulate(wealth.begin(), wealth.end(), 0.0);
  const double share = flow_rate * total / static_cast<double>(wealth.size());
  const double keep = 1.0 - flow_rate;
  for (double& w : wealth) w = keep * w + share;
}

void step(AgentEnsemble& ensemble, const SimConfig& config) {
  auto& wealth = ensemble.wealth_;
  const double mu = config.mu;
  const double sigma = config.sigma;
  double total = 0.0;
  for (double& w : wealth) {
    w *= std::exp(mu + sigma * ensemble.rng_.normal());
    total += w;
  }
  const std::uint64_t k = ensemble.time_index_ + 1;
  check_finite(total, k);
  const double share = config.flow() * total / static_cast<double>(wealth.size());
  const double keep = 1.0 - config.flow();
  for (double& w : wealth) w = keep * w + share;
  ensemble.time_index_ = k;
  rescale_if_needed(wealth, ensemble.log_scale_, total);
}

void step_with_growth(AgentEnsemble& ensemble, const SimConfig& config,
                      std::span<const double> log_growth) {
  auto& wealth = ensemble.wealth_;
  apply_growth(wealth, log_growth);
  const double total = std::accumulate(wealth.begin(), wealth.end(), 0.0);
  const std::uint64_t k = ensemble.time_index_ + 1;
  check_finite(total, k);
  apply_flow(wealth, config.flow());
  ensemble.time_index_ = k;
  rescale_if_needed(wealth, ensemble.log_scale_, total);
}

void evolve(AgentEnsemble& ensemble, const SimConfig& config, std::uint64_t steps,
            std::uint64_t every, const SnapshotObserver& observer) {
  if (every == 0) throw ValidationError("snapshot cadence must be positive");
  if (observer) observer(ensemble);
  for (std::uint64_t s = 1; s <= steps; ++s) {
    step(ensemble, config);
    if (observer && s % every == 0) observer(ensemble);
  }
}

void run_streaming(const SimConfig& config, const SnapshotObserver& observer) {
  auto ensemble = init_ensemble(config);
  evolve(ensemble, config, config.steps, config.snapshot_every, observer);
}

std::vector<WealthSnapshot> run(const SimConfig& config) {
  std::vector<WealthSnapshot> out;
  run_streaming(config, [&](const AgentEnsemble& e) { out.push_back(take_snapshot(e)); });
  return out;
}

}  // namespace wealthflow
