#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wealthflow/rng.hpp"

namespace wealthflow {

/// Stationary law of normalized wealth: inverse gamma with shape alpha and
/// scale alpha - 1, so that the mean is exactly one. The density has a Pareto
/// tail w^(-1-alpha).
class InverseGammaLaw {
 public:
  explicit InverseGammaLaw(double alpha);

  double alpha() const { return alpha_; }
  double scale() const { return alpha_ - 1.0; }

  double log_pdf(double w) const;
  double pdf(double w) const;
  // P(W <= w) = Q(alpha, (alpha - 1) / w), regularized upper incomplete gamma.
  double cdf(double w) const;
  double quantile(double p) const;

 private:
  double alpha_;
  double log_norm_;
};

double stationary_pdf(const InverseGammaLaw& law, double w);

// Gamma(shape, rate 1) variate by Marsaglia-Tsang squeeze/rejection.
double sample_gamma(double shape, Rng& rng);

// w = (alpha - 1) / g with g ~ Gamma(alpha, 1).
std::vector<double> sample_inverse_gamma(const InverseGammaLaw& law, std::size_t count, Rng& rng);

enum class GiniSource { Theoretical, Empirical };

struct GiniValue {
  double value;
  GiniSource source;
};

/// Gini coefficient of the stationary law:
///   G(a) = Γ(2a-1)/Γ(a) * { 2F1(a-1, 2a-1; a; -1)/Γ(a)
///                           + (1-a) 2F1(a, 2a-1; a+1; -1)/Γ(a+1) }.
GiniValue gini_theoretical(double alpha);

// Sorted-sample estimator 2 Σ i w_(i) / (N Σ w) - (N + 1) / N, no bias correction.
GiniValue gini_empirical(std::span<const double> wealth);

// Same estimator on data already sorted ascending; no validation.
double gini_of_sorted(std::span<const double> sorted_ascending);

std::vector<std::pair<double, GiniValue>> gini_curve(std::span<const double> alphas);

}  // namespace wealthflow
