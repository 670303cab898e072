#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wealthflow/sim_engine.hpp"

namespace wealthflow {

struct ScalarSeries {
  std::vector<double> values;
  std::uint64_t step_stride = 1;  // evolution steps between consecutive values
};

struct AutocorrOptions {
  // Window M is the smallest M with M >= window_factor * tau(M).
  double window_factor = 6.0;
  std::size_t min_length = 100;
};

struct AutocorrEstimate {
  double tau;          // in evolution steps
  double tau_stderr;   // in evolution steps
  std::size_t window;  // in samples
  std::size_t length;  // in samples
};

// Normalized empirical autocorrelation rho(0..max_lag).
std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag);

/// Integrated autocorrelation time tau = 1/2 + Σ_{k=1}^{M} rho(k), with the
/// self-consistent window above, scaled by step_stride. The error estimate is
/// the usual large-sample variance 2 (2M + 1) tau^2 / n.
AutocorrEstimate integrated_autocorr(const ScalarSeries& series, const AutocorrOptions& opts = {});

double integrated_autocorr_time(const ScalarSeries& series, const AutocorrOptions& opts = {});

struct RelaxationOptions {
  std::size_t replicas = 100;
  std::uint64_t step_cap = 1'000'000;
  unsigned jobs = 1;
};

struct RelaxationEstimate {
  double mean;    // steps, over uncensored replicas
  double std_error;  // standard error of the mean
  std::size_t replicas;
  std::size_t censored;  // replicas that never crossed within step_cap
  std::uint64_t step_cap;
  std::vector<std::uint64_t> first_passage;  // per replica; step_cap + 1 if censored
};

/// Mean first-passage time of the empirical Gini above `target` from cold
/// starts. Replica r uses seed derive_seed(config.seed, r). Censored replicas
/// are counted, never dropped; NumericError if all replicas are censored.
RelaxationEstimate exponential_relaxation_time(const SimConfig& config, double target,
                                               const RelaxationOptions& opts = {});

struct FitParam {
  std::string name;
  double value;
  double std_error;
};

struct FitResult {
  std::vector<FitParam> params;
  double residual_norm = 0.0;
  std::size_t n_points = 0;

  double value(const std::string& name) const;
  double std_error_of(const std::string& name) const;
};

/// Least-squares line in log-log space, value = prefactor * sigma^-exponent.
/// Parameters "exponent" and "prefactor"; residual norm in log space.
FitResult fit_power_law(std::span<const std::pair<double, double>> points);

// Overlap decay law (1 - n/N) exp(-A sqrt(x) - B x) + n/N.
double overlap_decay_model(double x, double a, double b, double floor);

// Central-difference Jacobian column pair (d/dA, d/dB) of the model at x.
std::pair<double, double> overlap_decay_jacobian(double x, double a, double b, double floor);

struct OverlapFitOptions {
  int max_iterations = 200;
  double tolerance = 1e-12;
};

/// Gauss-Newton fit of (A, B) with a numeric Jacobian and step halving,
/// started from the regression of -ln((Ω - n/N)/(1 - n/N)) on (sqrt(x), x) over
/// points with Ω > n/N. Standard errors from s^2 (J^T J)^-1.
FitResult fit_overlap_decay(std::span<const std::pair<double, double>> points, std::size_t top_n,
                            std::size_t n_agents, const OverlapFitOptions& opts = {});

enum class ScalingConvention {
  TauRho,   // k alpha sigma^2
  Overlap,  // k sigma^2 (alpha - 1)
};

std::string to_string(ScalingConvention convention);
ScalingConvention parse_scaling_convention(const std::string& text);

double rescaled_lag(double lag, double alpha, double sigma, ScalingConvention convention);

struct LagCurve {
  std::string label;
  double alpha;
  double sigma;
  std::vector<double> lags;    // in evolution steps, ascending
  std::vector<double> values;  // same length
};

struct RescaledCurve {
  std::string label;
  std::vector<double> x;
  std::vector<double> values;
};

struct PairDeviation {
  std::size_t first;
  std::size_t second;
  double max_abs_deviation;
  double at_x;  // where the maximum occurs
};

struct CollapseReport {
  ScalingConvention convention;
  double max_pairwise_deviation;
  double x_min;
  double x_max;
  std::vector<PairDeviation> pairs;
  std::vector<RescaledCurve> curves;
};

/// Rescales every curve's lag axis, interpolates linearly onto the union of
/// abscissae inside the shared x range and reports the largest pairwise
/// absolute difference. `x_limit` optionally caps the compared range.
CollapseReport collapse_check(std::span<const LagCurve> curves, ScalingConvention convention,
                              double x_limit = 0.0);

// Same comparison on curves whose abscissae are already rescaled.
CollapseReport collapse_rescaled(std::vector<RescaledCurve> curves, ScalingConvention convention,
                                 double x_limit = 0.0);

// Piecewise-linear interpolation; x must lie within [xs.front(), xs.back()].
double interpolate(std::span<const double> xs, std::span<const double> ys, double x);

}  // namespace wealthflow
