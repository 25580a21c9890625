// Hot-path samplers in isolation: exact binomial variates on each of their
// internal paths, the per-class inclusion count, the class-union sampler on a
// realistically grown degree registry, and the literal per-candidate
// procedure it replaces (the latter two at the same sizes, for contrast).
#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "sapa/model.hpp"
#include "sapa/params.hpp"
#include "sapa/rng.hpp"
#include "sapa/samplers.hpp"

namespace {

void run_binomial(benchmark::State& st, long c, double p) {
  sapa::RngStream rng = sapa::derive_stream(11, 0);
  long sink = 0;
  for (auto _ : st) sink += sapa::binomial(c, p, rng);
  benchmark::DoNotOptimize(sink);
  st.SetItemsProcessed(st.iterations());
}

void run_included_count(benchmark::State& st, double expected_hits) {
  const long eligible = st.range(0);
  const double q = expected_hits / static_cast<double>(eligible);
  sapa::RngStream rng = sapa::derive_stream(11, 1);
  long sink = 0;
  for (auto _ : st) sink += sapa::detail::included_count(eligible, q, expected_hits, rng);
  benchmark::DoNotOptimize(sink);
  st.SetItemsProcessed(st.iterations());
}

// One realistically grown graph per size, shared across the registry-level
// benchmarks in this binary (growth itself is measured in bench_step).
const sapa::GraphState& grown_state(long n) {
  static std::map<long, std::unique_ptr<sapa::GraphState>> cache;
  std::unique_ptr<sapa::GraphState>& slot = cache[n];
  if (!slot) {
    sapa::ModelParams params;
    params.a = 0.5;  // condensation: a few persistent high-degree classes
    params.alpha = 0.3;
    params.d = 2;
    params.n0 = 8;
    params.steps = n;
    params.seed = 42;
    params.checkpoint_stride = n;
    sapa::RngStream rng = sapa::derive_stream(42, 0);
    slot = std::make_unique<sapa::GraphState>(params, rng);
    for (long i = 0; i < n; ++i) slot->step(rng);
  }
  return *slot;
}

void run_class_union(benchmark::State& st) {
  const sapa::GraphState& state = grown_state(st.range(0));
  const sapa::ModelParams& params = state.params();
  const double n_prime = state.n_prime();
  const std::int32_t excluded = 0;
  const std::int32_t incoming_id = state.vertex_count();
  const auto p_of_degree = [&](long degree) {
    const double raw = (params.alpha * static_cast<double>(degree) + params.beta) / n_prime;
    return raw < 1.0 ? raw : 1.0;
  };
  sapa::RngStream rng = sapa::derive_stream(11, 2);
  std::vector<std::int32_t> out;
  for (auto _ : st) {
    sapa::class_union_sample(state.registry(), std::span(&excluded, 1),
                             std::span(&incoming_id, 1), p_of_degree, params.d, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations());
}

void run_per_candidate_scan(benchmark::State& st) {
  const sapa::GraphState& state = grown_state(st.range(0));
  const sapa::ModelParams& params = state.params();
  std::vector<long> degrees(static_cast<std::size_t>(state.vertex_count()) + 1, 0);
  for (std::int32_t id = 0; id < state.vertex_count(); ++id)
    degrees[static_cast<std::size_t>(id)] = state.vertex(id).in_degree;
  sapa::RngStream rng = sapa::derive_stream(11, 3);
  for (auto _ : st) {
    const auto ids = sapa::two_stage_oracle(degrees, 0, 1, params.alpha, params.beta, params.d,
                                            state.n_prime(), rng);
    benchmark::DoNotOptimize(ids.data());
  }
  st.SetItemsProcessed(st.iterations());
}

}  // namespace

// Single-uniform inversion (c*p small), the complement trick (p > 1/2), and
// the halving split (c*p large).
BENCHMARK_CAPTURE(run_binomial, inversion_c30_p03, 30, 0.3);
BENCHMARK_CAPTURE(run_binomial, complement_c30_p09, 30, 0.9);
BENCHMARK_CAPTURE(run_binomial, inversion_c1e6_p1e6, 1000000, 1e-6);
BENCHMARK_CAPTURE(run_binomial, split_c1e6_p002, 1000000, 0.02)->Unit(benchmark::kMicrosecond);

// Typical per-class shapes during an edge step: a huge class with O(1)
// expected hits, and the same class squeezed to mostly-zero hits.
BENCHMARK_CAPTURE(run_included_count, two_expected, 2.0)->Arg(100000);
BENCHMARK_CAPTURE(run_included_count, half_expected, 0.5)->Arg(100000);

BENCHMARK(run_class_union)->Arg(10000)->Arg(100000)->Unit(benchmark::kMicrosecond);
BENCHMARK(run_per_candidate_scan)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
