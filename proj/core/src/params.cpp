#include "sapa/params.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sapa {

namespace {

void reject(const std::string& what) { throw std::invalid_argument("ModelParams: " + what); }

}  // namespace

void ModelParams::validate() const {
  if (!(a > 0.0) || !(a <= 0.5)) reject("a must be in (0, 1/2], got " + std::to_string(a));
  if (!(alpha > 0.0) || !(alpha <= 0.5)) reject("alpha must be in (0, 1/2], got " + std::to_string(alpha));
  if (!(b > 0.0) || !std::isfinite(b)) reject("b must be positive and finite");
  if (!(beta > 0.0) || !std::isfinite(beta)) reject("beta must be positive and finite");
  if (d < 1) reject("d must be >= 1");
  if (d > 64) reject("d must be <= 64");
  if (max_m < 1) reject("M must be >= 1");
  if (static_cast<std::size_t>(max_m) != m_dist.size())
    reject("m_dist must have exactly M entries");
  double sum = 0.0;
  bool any_positive = false;
  for (double p : m_dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) reject("m_dist entries must be >= 0");
    if (p > 0.0) any_positive = true;
    sum += p;
  }
  if (!any_positive) reject("m_dist must have at least one positive entry");
  if (std::abs(sum - 1.0) > 1e-12) reject("m_dist must sum to 1 within 1e-12");
  if (n0 <= max_m) reject("n0 must exceed M");
  if (steps < 0) reject("steps must be >= 0");
  if (track_k < 1) reject("track_k must be >= 1");
  if (track_k > n0) reject("track_k must not exceed n0");
  if (checkpoint_stride < 1) reject("checkpoint_stride must be >= 1");
  if (n0 + steps >= static_cast<long>(std::numeric_limits<std::int32_t>::max()) - 2)
    reject("n0 + steps too large for 32-bit vertex ids");
}

double ModelParams::mean_m() const {
  double mean = 0.0;
  for (std::size_t i = 0; i < m_dist.size(); ++i) mean += m_dist[i] * static_cast<double>(i + 1);
  return mean;
}

int ModelParams::min_m() const {
  for (std::size_t i = 0; i < m_dist.size(); ++i)
    if (m_dist[i] > 0.0) return static_cast<int>(i + 1);
  return max_m;
}

}  // namespace sapa
