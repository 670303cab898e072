#include "wealthflow/dist_analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "wealthflow/error.hpp"
#include "wealthflow/special_fn.hpp"

namespace wealthflow {
namespace {

void require_pareto_index(double alpha, const char* where) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw ValidationError(std::string(where) + ": alpha must be finite and > 1, got " +
                          std::to_string(alpha));
  }
}

}  // namespace

InverseGammaLaw::InverseGammaLaw(double alpha) : alpha_(alpha) {
  require_pareto_index(alpha, "InverseGammaLaw");
  log_norm_ = alpha * std::log(alpha - 1.0) - log_gamma(alpha);
}

double InverseGammaLaw::log_pdf(double w) const {
  if (!(w > 0.0)) throw ValidationError("stationary_pdf: w must be positive");
  return log_norm_ - scale() / w - (1.0 + alpha_) * std::log(w);
}

double InverseGammaLaw::pdf(double w) const { return std::exp(log_pdf(w)); }

double InverseGammaLaw::cdf(double w) const {
  if (!(w > 0.0)) return 0.0;
  if (std::isinf(w)) return 1.0;
  return boost::math::gamma_q(alpha_, scale() / w);
}

double InverseGammaLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile: p must lie in (0, 1)");
  return scale() / boost::math::gamma_q_inv(alpha_, p);
}

double stationary_pdf(const InverseGammaLaw& law, double w) { return law.pdf(w); }

double sample_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw ValidationError("sample_gamma: shape must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with a uniform power.
    return sample_gamma(shape + 1.0, rng) * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<double> sample_inverse_gamma(const InverseGammaLaw& law, std::size_t count, Rng& rng) {
  std::vector<double> out(count);
  for (auto& w : out) w = law.scale() / sample_gamma(law.alpha(), rng);
  return out;
}

GiniValue gini_theoretical(double alpha) {
  require_pareto_index(alpha, "gini_theoretical");
  const double lg_2a1 = log_gamma(2.0 * alpha - 1.0);
  const double lg_a = log_gamma(alpha);
  const double lg_a1 = log_gamma(alpha + 1.0);
  const double f1 = hyp2f1_at_minus_one({alpha - 1.0, 2.0 * alpha - 1.0, alpha});
  const double f2 = hyp2f1_at_minus_one({alpha, 2.0 * alpha - 1.0, alpha + 1.0});
  const double g = std::exp(lg_2a1 - 2.0 * lg_a) * f1 +
                   (1.0 - alpha) * std::exp(lg_2a1 - lg_a - lg_a1) * f2;
  return {g, GiniSource::Theoretical};
}

double gini_of_sorted(std::span<const double> sorted) {
  const auto n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += static_cast<double>(i + 1) * sorted[i];
    total += sorted[i];
  }
  // Rounding can leave a perfectly equal sample a few ulps below zero.
  return std::max(0.0, 2.0 * weighted / (n * total) - (n + 1.0) / n);
}

GiniValue gini_empirical(std::span<const double> wealth) {
  if (wealth.empty()) throw ValidationError("gini_empirical: empty input");
  std::vector<double> sorted(wealth.begin(), wealth.end());
  for (double w : sorted) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("gini_empirical: entries must be positive and finite");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  return {gini_of_sorted(sorted), GiniSource::Empirical};
}

std::vector<std::pair<double, GiniValue>> gini_curve(std::span<const double> alphas) {
  std::vector<std::pair<double, GiniValue>> out;
  out.reserve(alphas.size());
  for (double a : alphas) out.emplace_back(a, gini_theoretical(a));
  return out;
}

}  // namespace wealthflow
