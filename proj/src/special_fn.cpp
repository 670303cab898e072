#include "wealthflow/special_fn.hpp"

#include <cmath>
#include <string>

#include "wealthflow/error.hpp"

namespace wealthflow {
namespace {

bool is_non_positive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ValidationError("log_gamma: argument must be positive and finite, got " +
                          std::to_string(x));
  }
  return std::lgamma(x);
}

namespace detail {

double hyp2f1_series(double a, double b, double c, double z) {
  if (is_non_positive_integer(c)) {
    throw ValidationError("hyp2f1: c must not be a non-positive integer");
  }
  if (std::abs(z) > 0.5) {
    throw ValidationError("hyp2f1: series path supports |z| <= 1/2 only");
  }
  double term = 1.0;
  double sum = 1.0;
  int small_run = 0;
  for (int n = 0; n < kHyp2F1MaxTerms; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;  // terminating series
    if (std::abs(term) < 1e-16 * std::abs(sum)) {
      if (++small_run == 3) return sum;
    } else {
      small_run = 0;
    }
  }
  throw NumericError("hyp2f1: series did not converge within " +
                     std::to_string(kHyp2F1MaxTerms) + " terms");
}

double hyp2f1_minus_one_pfaff(const Hyp2F1Args& args, bool pull_a) {
  const auto [a, b, c] = args;
  if (is_non_positive_integer(c)) {
    throw ValidationError("hyp2f1: c must not be a non-positive integer");
  }
  if (pull_a) return std::exp2(-a) * hyp2f1_series(a, c - b, c, 0.5);
  return std::exp2(-b) * hyp2f1_series(c - a, b, c, 0.5);
}

}  // namespace detail

double hyp2f1_at_minus_one(const Hyp2F1Args& args) {
  if (args.a == 0.0 || args.b == 0.0) return 1.0;
  const bool pull_a_positive = args.a >= 0.0 && args.c - args.b >= 0.0;
  const bool pull_b_positive = args.c - args.a >= 0.0 && args.b >= 0.0;
  const bool pull_a = pull_a_positive || !pull_b_positive;
  return detail::hyp2f1_minus_one_pfaff(args, pull_a);
}

}  // namespace wealthflow
