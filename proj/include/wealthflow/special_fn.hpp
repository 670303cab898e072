#pragma once

namespace wealthflow {

// ln Γ(x) for x > 0.
double log_gamma(double x);

struct Hyp2F1Args {
  double a;
  double b;
  double c;
};

/// Gauss hypergeometric function 2F1(a, b; c; -1).
///
/// Evaluated through a Pfaff transformation, which maps z = -1 to z = 1/2
/// where the power series converges geometrically:
///   2F1(a, b; c; -1) = 2^-a 2F1(a, c-b; c; 1/2) = 2^-b 2F1(c-a, b; c; 1/2).
/// The variant whose transformed upper parameters are both non-negative is
/// used when one exists, since its series has no sign changes.
/// Throws ValidationError if c is a non-positive integer, NumericError if the
/// series fails to converge within the term cap.
double hyp2f1_at_minus_one(const Hyp2F1Args& args);

namespace detail {

inline constexpr int kHyp2F1MaxTerms = 10000;

// Plain power series of 2F1(a, b; c; z) for |z| <= 1/2. Terminates when the
// term is below 1e-16 of the partial sum for three consecutive terms.
double hyp2f1_series(double a, double b, double c, double z);

// 2F1(a, b; c; -1) through one specific Pfaff variant: pull out (1-z)^-a
// (pull_a = true) or (1-z)^-b.
double hyp2f1_minus_one_pfaff(const Hyp2F1Args& args, bool pull_a);

}  // namespace detail
}  // namespace wealthflow
