#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wealthflow/error.hpp"
#include "wealthflow/special_fn.hpp"

using namespace wealthflow;

TEST(LogGamma, KnownValues) {
  EXPECT_DOUBLE_EQ(log_gamma(1.0), 0.0);
  EXPECT_NEAR(log_gamma(0.5), 0.5723649429247001, 1e-14);
  EXPECT_NEAR(log_gamma(6.0), std::log(120.0), 1e-13);
}

TEST(LogGamma, RejectsNonPositive) {
  EXPECT_THROW(log_gamma(0.0), ValidationError);
  EXPECT_THROW(log_gamma(-2.5), ValidationError);
}

TEST(LogGamma, RecurrenceOverGrid) {
  for (double x = 0.5; x <= 200.0; x += 0.25) {
    EXPECT_NEAR(log_gamma(x + 1.0) - log_gamma(x), std::log(x), 1e-12 * std::max(1.0, log_gamma(x + 1.0)))
        << "x=" << x;
  }
}

TEST(LogGamma, RelativeErrorAgainstTgamma) {
  for (double x = 0.5; x <= 170.0; x *= 1.37) {
    EXPECT_NEAR(std::exp(log_gamma(x)) / std::tgamma(x), 1.0, 1e-12) << "x=" << x;
  }
}

TEST(Hyp2F1, ZeroUpperParameterIsOne) {
  EXPECT_EQ(hyp2f1_at_minus_one({0.0, 3.7, 1.2}), 1.0);
  EXPECT_EQ(hyp2f1_at_minus_one({2.5, 0.0, 4.0}), 1.0);
}

TEST(Hyp2F1, LogIdentity) {
  // 2F1(1,1;2;z) = -ln(1-z)/z
  EXPECT_NEAR(hyp2f1_at_minus_one({1.0, 1.0, 2.0}), std::numbers::ln2, 1e-14);
}

TEST(Hyp2F1, EulerOracleReproducesLogIdentity) {
  EXPECT_NEAR(oracle::hyp2f1_minus_one_euler(1.0, 1.0, 2.0), std::numbers::ln2, 1e-14);
}

TEST(Hyp2F1, RejectsPoleInC) {
  EXPECT_THROW(hyp2f1_at_minus_one({1.0, 2.0, 0.0}), ValidationError);
  EXPECT_THROW(hyp2f1_at_minus_one({1.0, 2.0, -3.0}), ValidationError);
}

class Hyp2F1GiniSlots : public ::testing::TestWithParam<double> {};

TEST_P(Hyp2F1GiniSlots, PfaffAgreesWithEulerSeries) {
  const double alpha = GetParam();
  const Hyp2F1Args first{alpha - 1.0, 2.0 * alpha - 1.0, alpha};
  const Hyp2F1Args second{alpha, 2.0 * alpha - 1.0, alpha + 1.0};
  for (const auto& args : {first, second}) {
    const double ref = oracle::hyp2f1_minus_one_euler(args.a, args.b, args.c);
    EXPECT_NEAR(hyp2f1_at_minus_one(args), ref, 1e-10 * std::abs(ref))
        << "a=" << args.a << " b=" << args.b << " c=" << args.c;
  }
}

TEST_P(Hyp2F1GiniSlots, BothPfaffVariantsAgree) {
  const double alpha = GetParam();
  for (const Hyp2F1Args args : {Hyp2F1Args{alpha - 1.0, 2.0 * alpha - 1.0, alpha},
                                Hyp2F1Args{alpha, 2.0 * alpha - 1.0, alpha + 1.0}}) {
    const double pa = detail::hyp2f1_minus_one_pfaff(args, true);
    const double pb = detail::hyp2f1_minus_one_pfaff(args, false);
    EXPECT_NEAR(pa, pb, 1e-10 * std::abs(pb));
  }
}

INSTANTIATE_TEST_SUITE_P(Alphas, Hyp2F1GiniSlots, ::testing::Values(1.5, 2.0, 3.0, 4.0, 6.0, 8.0));

TEST(Hyp2F1, ContiguousRelationAtHalf) {
  // c(1-z) F(a,b;c) - c F(a-1,b;c) + (c-b) z F(a,b;c+1) = 0
  const double z = 0.5;
  for (double a : {0.3, 1.0, 2.5, 4.0}) {
    for (double b : {0.7, 1.5, 3.0}) {
      for (double c : {1.2, 2.0, 4.5}) {
        const double lhs = c * (1.0 - z) * detail::hyp2f1_series(a, b, c, z) -
                           c * detail::hyp2f1_series(a - 1.0, b, c, z) +
                           (c - b) * z * detail::hyp2f1_series(a, b, c + 1.0, z);
        const double scale = c * detail::hyp2f1_series(a, b, c, z);
        EXPECT_NEAR(lhs / scale, 0.0, 1e-8) << a << ' ' << b << ' ' << c;
      }
    }
  }
}

TEST(Hyp2F1, SeriesRejectsOutsideHalfDisk) {
  EXPECT_THROW(detail::hyp2f1_series(1.0, 1.0, 2.0, 0.75), ValidationError);
}
