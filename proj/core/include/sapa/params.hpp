#pragma once

#include <cstdint>
#include <vector>

namespace sapa {

// All model parameters plus run controls. validate() throws
// std::invalid_argument on any violation; everything else assumes a
// validated instance.
struct ModelParams {
  double a = 0.2;       // vertex-step radius slope, in (0, 1/2]
  double b = 1.0;       // vertex-step radius offset, > 0
  double alpha = 0.2;   // edge-step inclusion slope, in (0, 1/2]
  double beta = 1.0;    // edge-step inclusion offset, > 0
  int d = 1;            // number of inclusion samples per edge step, >= 1
  int max_m = 1;        // largest possible m_n, >= 1
  std::vector<double> m_dist = {1.0};  // P(m_n = 1), ..., P(m_n = max_m)
  long n0 = 2;          // initial vertex count, > max_m
  long steps = 1000;    // growth steps to run, >= 0
  std::uint64_t seed = 1;
  int track_k = 1;      // number of top in-degree ranks recorded, in [1, n0]
  long checkpoint_stride = 1;

  void validate() const;

  double mean_m() const;
  int min_m() const;  // smallest m with positive probability
  double exponent() const { return a + static_cast<double>(d) * alpha; }
};

}  // namespace sapa
