#pragma once

#include <span>
#include <string>
#include <vector>

#include "sapa/params.hpp"

namespace sapa {

enum class Regime { subcritical, critical, supercritical };

const char* regime_name(Regime r);

// Closed-form limit objects and the sequential fixed-point solve.
struct TheoryResult {
  Regime regime = Regime::subcritical;
  double exponent = 0.0;           // a + d*alpha
  double critical_constant = 0.0;  // 2 / (d*alpha)^2
  std::vector<double> x_star;      // positive roots, non-increasing; empty unless supercritical
  int condensate_count = 0;        // K; 0 iff not supercritical
  int r_m = 1;                     // smallest m with positive probability
};

// 1 - (1 - alpha*x)^d, base clamped at 0 so the solver bracket may exceed
// 1/alpha. Rejects negative x.
double h_fn(double x, double alpha, int d);

// Pr(B <= r-1) where B is a sum of independent Bernoulli(h_values[j]),
// j < i-1. Exactly 1 when i <= r. O(i*r) dynamic program.
double q_poly(int i, int r, std::span<const double> h_values);

// Brute-force subset enumeration of the same tail (test oracle); requires
// i <= 25.
double q_poly_enum(int i, int r, std::span<const double> h_values);

// E over m_dist of q_poly(i, m, h_values).
double q_expected(int i, std::span<const double> m_dist, std::span<const double> h_values);

// (a-1)x + h(x) * Q_k evaluated with the first k-1 h-values cached in
// h_prefix; concave in x with f_k(0) = 0.
double f_k(double x, std::span<const double> h_prefix, int k, const ModelParams& params);

// Predicted expected one-step increment of the k-th highest in-degree when
// the top ranks are distinct: a*z_k + h(z_k) * Q_k(z_1..z_{k-1}).
double drift(int k, std::span<const double> z, const ModelParams& params);

// Sequentially solve f_k = 0 for positive roots while the slope at zero,
// a - 1 + d*alpha*Q_k, stays positive; bisection to width 1e-12.
TheoryResult solve_fixed_point(const ModelParams& params, int k_max = 32);

// Regime from the sign of a + d*alpha - 1 (tolerance 1e-12); x_star filled
// only in the supercritical case.
TheoryResult classify_regime(const ModelParams& params, int k_max = 32);

// True when |a + d*alpha - 1| is within (0, 1e-9): classification is
// numerically delicate and the CLI warns.
bool near_critical(const ModelParams& params);

}  // namespace sapa
