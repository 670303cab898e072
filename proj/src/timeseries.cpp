#include "wealthflow/timeseries.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "wealthflow/dist_analytics.hpp"
#include "wealthflow/error.hpp"

namespace wealthflow {

// ---------------------------------------------------------------------------
// Autocorrelation

namespace {

struct Centered {
  std::vector<double> values;
  double variance;  // biased, 1/n
};

Centered center(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  Centered c{std::vector<double>(values.size()), 0.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    c.values[i] = values[i] - mean;
    c.variance += c.values[i] * c.values[i];
  }
  c.variance /= n;
  return c;
}

double lagged_covariance(const std::vector<double>& d, std::size_t lag) {
  double sum = 0.0;
  for (std::size_t i = 0; i + lag < d.size(); ++i) sum += d[i] * d[i + lag];
  return sum / static_cast<double>(d.size());
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> values, std::size_t max_lag) {
  if (values.size() < 2) throw ValidationError("autocorrelation: need at least two values");
  const auto c = center(values);
  if (!(c.variance > 0.0)) throw NumericError("autocorrelation: series has zero variance");
  max_lag = std::min(max_lag, values.size() - 1);
  std::vector<double> rho(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) rho[k] = lagged_covariance(c.values, k) / c.variance;
  return rho;
}

AutocorrEstimate integrated_autocorr(const ScalarSeries& series, const AutocorrOptions& opts) {
  const std::size_t n = series.values.size();
  if (n < std::max<std::size_t>(opts.min_length, 2)) {
    throw ValidationError("integrated_autocorr_time: series of length " + std::to_string(n) +
                          " is shorter than the minimum " + std::to_string(opts.min_length));
  }
  if (series.step_stride == 0) throw ValidationError("integrated_autocorr_time: zero stride");
  const auto c = center(series.values);
  if (!(c.variance > 0.0)) throw NumericError("integrated_autocorr_time: constant series");

  double tau = 0.5;
  std::size_t window = 0;
  for (std::size_t m = 1; m < n / 2; ++m) {
    tau += lagged_covariance(c.values, m) / c.variance;
    if (static_cast<double>(m) >= opts.window_factor * tau) {
      window = m;
      break;
    }
  }
  if (window == 0) {
    throw NumericError("integrated_autocorr_time: no self-consistent window below n/2; "
                       "the series is too short for its correlation time");
  }
  const double stride = static_cast<double>(series.step_stride);
  const double rel_var = 2.0 * (2.0 * static_cast<double>(window) + 1.0) / static_cast<double>(n);
  return {tau * stride, tau * stride * std::sqrt(rel_var), window, n};
}

double integrated_autocorr_time(const ScalarSeries& series, const AutocorrOptions& opts) {
  return integrated_autocorr(series, opts).tau;
}

// ---------------------------------------------------------------------------
// Relaxation from a cold start

namespace {

std::uint64_t first_passage(const SimConfig& config, double target, std::uint64_t cap) {
  auto ensemble = init_cold(config);
  std::vector<double> sorted(ensemble.size());
  for (std::uint64_t k = 1; k <= cap; ++k) {
    step(ensemble, config);
    std::copy(ensemble.wealth().begin(), ensemble.wealth().end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    if (gini_of_sorted(sorted) > target) return k;
  }
  return cap + 1;
}

}  // namespace

RelaxationEstimate exponential_relaxation_time(const SimConfig& config, double target,
                                               const RelaxationOptions& opts) {
  config.validate();
  if (opts.replicas == 0) throw ValidationError("relaxation: need at least one replica");
  std::vector<std::uint64_t> passage(opts.replicas, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < opts.replicas; r = next++) {
      try {
        SimConfig replica = config;
        replica.start = StartMode::Cold;
        replica.seed = derive_seed(config.seed, r);
        passage[r] = first_passage(replica, target, opts.step_cap);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, opts.replicas));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  RelaxationEstimate est{0.0, 0.0, opts.replicas, 0, opts.step_cap, passage};
  double sum = 0.0;
  double sum_sq = 0.0;
  for (auto k : passage) {
    if (k > opts.step_cap) {
      ++est.censored;
      continue;
    }
    sum += static_cast<double>(k);
    sum_sq += static_cast<double>(k) * static_cast<double>(k);
  }
  const auto done = static_cast<double>(opts.replicas - est.censored);
  if (done == 0.0) {
    throw NumericError("relaxation: all " + std::to_string(opts.replicas) +
                       " replicas censored at step cap " + std::to_string(opts.step_cap));
  }
  est.mean = sum / done;
  if (done > 1.0) {
    const double var = std::max(0.0, (sum_sq - done * est.mean * est.mean) / (done - 1.0));
    est.std_error = std::sqrt(var / done);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Fits

double FitResult::value(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw ValidationError("fit has no parameter '" + name + "'");
}

double FitResult::std_error_of(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.std_error;
  }
  throw ValidationError("fit has no parameter '" + name + "'");
}

FitResult fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw ValidationError("fit_power_law: need at least three points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [s, v] : points) {
    if (!(s > 0.0) || !(v > 0.0)) throw ValidationError("fit_power_law: data must be positive");
    lx.push_back(std::log(s));
    ly.push_back(std::log(v));
  }
  const auto n = static_cast<double>(points.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_power_law: sigma values must not all coincide");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - intercept - slope * lx[i];
    rss += r * r;
  }
  const double s2 = rss / (n - 2.0);
  const double se_slope = std::sqrt(s2 / sxx);
  const double se_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  const double prefactor = std::exp(intercept);
  return {{{"exponent", -slope, se_slope}, {"prefactor", prefactor, prefactor * se_intercept}},
          std::sqrt(rss),
          points.size()};
}

double overlap_decay_model(double x, double a, double b, double floor) {
  return (1.0 - floor) * std::exp(-a * std::sqrt(x) - b * x) + floor;
}

std::pair<double, double> overlap_decay_jacobian(double x, double a, double b, double floor) {
  const double ha = 1e-6 * std::max(1.0, std::abs(a));
  const double hb = 1e-6 * std::max(1.0, std::abs(b));
  const double da =
      (overlap_decay_model(x, a + ha, b, floor) - overlap_decay_model(x, a - ha, b, floor)) /
      (2.0 * ha);
  const double db =
      (overlap_decay_model(x, a, b + hb, floor) - overlap_decay_model(x, a, b - hb, floor)) /
      (2.0 * hb);
  return {da, db};
}

namespace {

double sum_sq_residuals(std::span<const std::pair<double, double>> pts, double a, double b,
                        double floor) {
  double rss = 0.0;
  for (const auto& [x, y] : pts) {
    const double r = y - overlap_decay_model(x, a, b, floor);
    rss += r * r;
  }
  return rss;
}

}  // namespace

FitResult fit_overlap_decay(std::span<const std::pair<double, double>> points, std::size_t top_n,
                            std::size_t n_agents, const OverlapFitOptions& opts) {
  if (points.size() < 4) throw ValidationError("fit_overlap_decay: need at least four points");
  if (top_n == 0 || top_n >= n_agents) {
    throw ValidationError("fit_overlap_decay: need 0 < n < N");
  }
  for (const auto& [x, y] : points) {
    if (!(x >= 0.0) || !std::isfinite(y)) {
      throw ValidationError("fit_overlap_decay: x must be non-negative and values finite");
    }
  }
  const double floor = static_cast<double>(top_n) / static_cast<double>(n_agents);

  // Linearized start: -ln((Ω - f)/(1 - f)) = A sqrt(x) + B x.
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  std::size_t usable = 0;
  for (const auto& [x, y] : points) {
    if (!(y > floor) || x <= 0.0) continue;
    const double t = -std::log((y - floor) / (1.0 - floor));
    const Eigen::Vector2d row(std::sqrt(x), x);
    normal += row * row.transpose();
    rhs += row * t;
    ++usable;
  }
  Eigen::Vector2d p(1.0, 0.1);
  if (usable >= 2 && std::abs(normal.determinant()) > 0.0) p = normal.ldlt().solve(rhs);

  const auto n = points.size();
  Eigen::MatrixXd jac(n, 2);
  Eigen::VectorXd res(n);
  auto linearize = [&](const Eigen::Vector2d& q) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto [x, y] = points[i];
      const auto [da, db] = overlap_decay_jacobian(x, q[0], q[1], floor);
      jac(static_cast<Eigen::Index>(i), 0) = da;
      jac(static_cast<Eigen::Index>(i), 1) = db;
      res[static_cast<Eigen::Index>(i)] = y - overlap_decay_model(x, q[0], q[1], floor);
    }
  };

  double rss = sum_sq_residuals(points, p[0], p[1], floor);
  bool converged = false;
  for (int it = 0; it < opts.max_iterations && !converged; ++it) {
    linearize(p);
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d delta = jtj.ldlt().solve(jac.transpose() * res);
    if (!delta.allFinite()) throw NumericError("fit_overlap_decay: singular normal equations");
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Eigen::Vector2d trial = p + scale * delta;
      const double trial_rss = sum_sq_residuals(points, trial[0], trial[1], floor);
      if (trial_rss <= rss) {
        const double step_size = (trial - p).norm();
        p = trial;
        converged = step_size <= opts.tolerance * (1.0 + p.norm()) ||
                    rss - trial_rss <= opts.tolerance * opts.tolerance * (rss + 1e-300);
        rss = trial_rss;
        improved = true;
        break;
      }
    }
    // No descent along the Gauss-Newton direction: already at the minimum.
    if (!improved) converged = true;
  }
  if (!converged) {
    throw NumericError("fit_overlap_decay: no convergence after " +
                       std::to_string(opts.max_iterations) + " iterations");
  }
  linearize(p);
  const Eigen::Matrix2d jtj = jac.transpose() * jac;
  const double s2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
  const Eigen::Matrix2d cov = s2 * jtj.inverse();
  return {{{"A", p[0], std::sqrt(std::max(0.0, cov(0, 0)))},
           {"B", p[1], std::sqrt(std::max(0.0, cov(1, 1)))}},
          std::sqrt(rss),
          n};
}

// ---------------------------------------------------------------------------
// Scaling collapse

std::string to_string(ScalingConvention convention) {
  return convention == ScalingConvention::TauRho ? "tau-rho" : "overlap";
}

ScalingConvention parse_scaling_convention(const std::string& text) {
  if (text == "tau-rho" || text == "TauRho" || text == "k_alpha_sigma2") {
    return ScalingConvention::TauRho;
  }
  if (text == "overlap" || text == "Overlap" || text == "k_sigma2_alpha_minus_1") {
    return ScalingConvention::Overlap;
  }
  throw ValidationError("unknown scaling convention '" + text + "' (tau-rho | overlap)");
}

double rescaled_lag(double lag, double alpha, double sigma, ScalingConvention convention) {
  const double s2 = sigma * sigma;
  return convention == ScalingConvention::TauRho ? lag * alpha * s2 : lag * s2 * (alpha - 1.0);
}

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (xs.empty() || xs.size() != ys.size()) throw ValidationError("interpolate: bad table");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

CollapseReport collapse_rescaled(std::vector<RescaledCurve> curves, ScalingConvention convention,
                                 double x_limit) {
  if (curves.size() < 2) throw ValidationError("collapse_check: need at least two curves");
  double lo = -INFINITY;
  double hi = INFINITY;
  for (const auto& c : curves) {
    if (c.x.size() < 2 || c.x.size() != c.values.size()) {
      throw ValidationError("collapse_check: curve '" + c.label + "' needs >= 2 points");
    }
    if (!std::is_sorted(c.x.begin(), c.x.end())) {
      throw ValidationError("collapse_check: curve '" + c.label + "' is not sorted by lag");
    }
    lo = std::max(lo, c.x.front());
    hi = std::min(hi, c.x.back());
  }
  if (x_limit > 0.0) hi = std::min(hi, x_limit);
  if (!(lo < hi)) throw ValidationError("collapse_check: curves share no rescaled x range");

  std::vector<double> grid{lo, hi};
  for (const auto& c : curves) {
    for (double x : c.x) {
      if (x > lo && x < hi) grid.push_back(x);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<std::vector<double>> sampled;
  sampled.reserve(curves.size());
  for (const auto& c : curves) {
    std::vector<double> v(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) v[g] = interpolate(c.x, c.values, grid[g]);
    sampled.push_back(std::move(v));
  }

  CollapseReport report{convention, 0.0, lo, hi, {}, {}};
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = i + 1; j < curves.size(); ++j) {
      double dev = 0.0;
      double at = lo;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const double d = std::abs(sampled[i][g] - sampled[j][g]);
        if (d > dev) {
          dev = d;
          at = grid[g];
        }
      }
      report.pairs.push_back({i, j, dev, at});
      report.max_pairwise_deviation = std::max(report.max_pairwise_deviation, dev);
    }
  }
  report.curves = std::move(curves);
  return report;
}

CollapseReport collapse_check(std::span<const LagCurve> curves, ScalingConvention convention,
                              double x_limit) {
  std::vector<RescaledCurve> rescaled;
  rescaled.reserve(curves.size());
  for (const auto& c : curves) {
    if (c.lags.size() != c.values.size()) {
      throw ValidationError("collapse_check: curve '" + c.label + "' has mismatched columns");
    }
    RescaledCurve r{c.label, {}, c.values};
    r.x.reserve(c.lags.size());
    for (double k : c.lags) r.x.push_back(rescaled_lag(k, c.alpha, c.sigma, convention));
    rescaled.push_back(std::move(r));
  }
  return collapse_rescaled(std::move(rescaled), convention, x_limit);
}

}  // namespace wealthflow
