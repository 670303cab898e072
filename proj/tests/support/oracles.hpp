#pragma once
// Independent reference implementations used by the unit and acceptance tests.
// None of these call into the production code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t tied = 0;
};

// O(M^2) enumeration of unordered pairs.
inline PairCounts count_pairs(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const auto dx = x[i] - x[j];
      const auto dy = y[i] - y[j];
      if (dx == 0 || dy == 0) {
        ++c.tied;
      } else if ((dx > 0) == (dy > 0)) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

inline double kendall_tau(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  const auto c = count_pairs(x, y);
  const double m = static_cast<double>(x.size());
  return 2.0 * static_cast<double>(c.concordant - c.discordant) / (m * (m - 1.0));
}

inline double goodman_kruskal_gamma(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  const auto c = count_pairs(x, y);
  return static_cast<double>(c.concordant - c.discordant) /
         static_cast<double>(c.concordant + c.discordant);
}

// Spearman from the definition, in the same integer arithmetic as the formula.
inline double spearman_rho(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  std::int64_t d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  const auto m = static_cast<std::int64_t>(x.size());
  const std::int64_t denom = m * (m * m - 1);
  return static_cast<double>(denom - 6 * d2) / static_cast<double>(denom);
}

// Pearson correlation of raw values; on tie-free ranks this is Spearman's rho.
inline double pearson(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += static_cast<double>(x[i]);
    my += static_cast<double>(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = static_cast<double>(x[i]) - mx;
    const double b = static_cast<double>(y[i]) - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  return sxy / std::sqrt(sxx * syy);
}

// Mean absolute difference form: Σ_ij |w_i - w_j| / (2 N^2 mean).
inline double gini_pairwise(const std::vector<double>& w) {
  const double n = static_cast<double>(w.size());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double s = 0.0;
  for (double a : w) {
    for (double b : w) s += std::abs(a - b);
  }
  return s / (2.0 * n * n * mean);
}

/// Gini of the unit-mean inverse-gamma law by quadrature of the Lorenz curve,
/// G = 1 - 2 ∫_0^1 L(p) dp. The partial mean has the closed form
/// E[W; W <= x] = Q(alpha - 1, (alpha - 1) / x), and the quantile is
/// x(p) = (alpha - 1) / Q^-1(alpha, p).
inline double gini_lorenz_quadrature(double alpha) {
  using boost::math::gamma_q;
  using boost::math::gamma_q_inv;
  const double beta = alpha - 1.0;
  auto lorenz = [&](double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    // (alpha - 1) / x(p) = Q^-1(alpha, p)
    const double y = gamma_q_inv(alpha, p);
    return gamma_q(beta, y);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double area = integrator.integrate(lorenz, 0.0, 1.0, 1e-13);
  return 1.0 - 2.0 * area;
}

/// Direct hypergeometric series at z = -1, summed by the Euler transform
///   Σ (-1)^n u_n = Σ_k (-1)^k (Δ^k u)_0 / 2^(k+1),
/// with u_n = (a)_n (b)_n / ((c)_n n!). Forward differences cancel heavily,
/// hence the decimal multiprecision type.
inline double hyp2f1_minus_one_euler(double a_in, double b_in, double c_in, int terms = 260) {
  using Big = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<160>>;
  const Big a(a_in), b(b_in), c(c_in);
  std::vector<Big> u(static_cast<std::size_t>(terms) + 1);
  u[0] = 1;
  for (int n = 0; n < terms; ++n) {
    u[n + 1] = u[n] * (a + n) * (b + n) / ((c + n) * (n + 1));
  }
  // Δ^k u_0 = Σ_j (-1)^(k-j) C(k, j) u_j
  Big sum = 0;
  Big pow2 = 2;
  for (int k = 0; k <= terms; ++k) {
    Big diff = 0;
    Big binom = 1;
    for (int j = 0; j <= k; ++j) {
      const Big term = binom * u[j];
      if ((k - j) % 2 == 0) {
        diff += term;
      } else {
        diff -= term;
      }
      binom = binom * (k - j) / (j + 1);
    }
    if (k % 2 == 0) {
      sum += diff / pow2;
    } else {
      sum -= diff / pow2;
    }
    pow2 *= 2;
  }
  return static_cast<double>(sum);
}

// Two-sided one-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic critical value of sqrt(n) D at level 0.01.
inline double ks_critical_01(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace oracle
