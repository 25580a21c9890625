#include "sapa/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sapa {

namespace {

double pow_int(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument(std::string(what) + " outside [0, 1]");
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "unknown";
}

double h_fn(double x, double alpha, int d) {
  if (x < 0.0) throw std::invalid_argument("h_fn: negative argument");
  const double base = std::max(0.0, 1.0 - alpha * x);
  return 1.0 - pow_int(base, d);
}

double q_poly(int i, int r, std::span<const double> h_values) {
  if (i < 1 || r < 1) throw std::invalid_argument("q_poly: i and r must be >= 1");
  if (h_values.size() != static_cast<std::size_t>(i - 1))
    throw std::invalid_argument("q_poly: expected i-1 probabilities");
  for (double h : h_values) check_probability(h, "q_poly: probability");
  if (i <= r) return 1.0;  // at most i-1 <= r-1 of them can be present

  // dp[j] = Pr(exactly j of the first t Bernoullis are 1), truncated at r-1;
  // mass at >= r is dropped (it never returns below the cap).
  std::vector<double> dp(static_cast<std::size_t>(r), 0.0);
  dp[0] = 1.0;
  int filled = 0;
  for (double h : h_values) {
    const int top = std::min(filled + 1, r - 1);
    for (int j = top; j >= 1; --j) dp[j] = dp[j] * (1.0 - h) + dp[j - 1] * h;
    dp[0] *= (1.0 - h);
    filled = top;
  }
  double tail = 0.0;
  for (int j = r - 1; j >= 0; --j) tail += dp[j];
  return std::min(1.0, tail);
}

double q_poly_enum(int i, int r, std::span<const double> h_values) {
  if (i < 1 || r < 1) throw std::invalid_argument("q_poly_enum: i and r must be >= 1");
  if (h_values.size() != static_cast<std::size_t>(i - 1))
    throw std::invalid_argument("q_poly_enum: expected i-1 probabilities");
  if (i > 25) throw std::invalid_argument("q_poly_enum: too many terms to enumerate");
  for (double h : h_values) check_probability(h, "q_poly_enum: probability");
  const int count = i - 1;
  double total = 0.0;
  for (std::uint64_t bits = 0; bits < (1ull << count); ++bits) {
    if (std::popcount(bits) > r - 1) continue;
    double p = 1.0;
    for (int j = 0; j < count; ++j)
      p *= (bits >> j & 1) ? h_values[j] : 1.0 - h_values[j];
    total += p;
  }
  return total;
}

double q_expected(int i, std::span<const double> m_dist, std::span<const double> h_values) {
  double q = 0.0;
  for (std::size_t idx = 0; idx < m_dist.size(); ++idx) {
    if (m_dist[idx] <= 0.0) continue;
    q += m_dist[idx] * q_poly(i, static_cast<int>(idx + 1), h_values);
  }
  return q;
}

double f_k(double x, std::span<const double> h_prefix, int k, const ModelParams& params) {
  const double qk = q_expected(k, params.m_dist, h_prefix);
  return (params.a - 1.0) * x + h_fn(x, params.alpha, params.d) * qk;
}

double drift(int k, std::span<const double> z, const ModelParams& params) {
  if (k < 1 || z.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("drift: need the first k normalized degrees");
  std::vector<double> h_prefix(static_cast<std::size_t>(k - 1));
  for (int j = 0; j + 1 < k; ++j) h_prefix[j] = h_fn(z[j], params.alpha, params.d);
  const double qk = q_expected(k, params.m_dist, h_prefix);
  return params.a * z[k - 1] + h_fn(z[k - 1], params.alpha, params.d) * qk;
}

TheoryResult solve_fixed_point(const ModelParams& params, int k_max) {
  if (k_max < 1) throw std::invalid_argument("solve_fixed_point: k_max must be >= 1");
  TheoryResult result;
  const double d_alpha = static_cast<double>(params.d) * params.alpha;
  result.exponent = params.a + d_alpha;
  result.critical_constant = 2.0 / (d_alpha * d_alpha);
  result.r_m = params.min_m();
  const double s = result.exponent - 1.0;
  result.regime = std::abs(s) <= 1e-12 ? Regime::critical
                  : s < 0.0            ? Regime::subcritical
                                       : Regime::supercritical;

  std::vector<double> h_prefix;
  const double hi_end = 1.0 / (1.0 - params.a) + 1.0;  // f_k < 0 beyond this
  for (int k = 1; k <= k_max; ++k) {
    const double qk = q_expected(k, params.m_dist, h_prefix);
    const double slope0 = params.a - 1.0 + d_alpha * qk;
    if (slope0 <= 0.0) break;  // f_k concave with f_k(0)=0: no positive root
    double lo = 0.0, hi = hi_end;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (f_k(mid, h_prefix, k, params) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    if (hi - lo > 1e-12) throw std::runtime_error("solve_fixed_point: bisection failed to converge");
    const double root = 0.5 * (lo + hi);
    result.x_star.push_back(root);
    h_prefix.push_back(h_fn(root, params.alpha, params.d));
  }
  result.condensate_count = static_cast<int>(result.x_star.size());
  return result;
}

TheoryResult classify_regime(const ModelParams& params, int k_max) {
  TheoryResult result = solve_fixed_point(params, k_max);
  if (result.regime != Regime::supercritical) {
    result.x_star.clear();
    result.condensate_count = 0;
  }
  return result;
}

bool near_critical(const ModelParams& params) {
  const double gap = std::abs(params.exponent() - 1.0);
  return gap > 0.0 && gap < 1e-9;
}

}  // namespace sapa
