// Growth-step throughput on graphs pre-grown to a working size, across the
// three qualitative parameter regimes, plus the two read-only sub-queries in
// isolation. The state keeps growing while the timing loop runs, so the
// reported time is an amortized per-step figure around the starting size.
#include <benchmark/benchmark.h>

#include <cstdint>

#include "sapa/model.hpp"
#include "sapa/params.hpp"
#include "sapa/rng.hpp"

namespace {

sapa::ModelParams make_params(double a, double alpha, int d, long n_target) {
  sapa::ModelParams params;
  params.a = a;
  params.alpha = alpha;
  params.d = d;
  params.n0 = 8;
  params.steps = n_target;  // sizes the spatial-index window for this scale
  params.seed = 42;
  params.track_k = 1;
  params.checkpoint_stride = n_target;
  return params;
}

struct GrownGraph {
  sapa::RngStream rng;
  sapa::GraphState state;

  GrownGraph(double a, double alpha, int d, long n_target)
      : rng(sapa::derive_stream(42, 0)), state(make_params(a, alpha, d, n_target), rng) {
    for (long i = 0; i < n_target; ++i) state.step(rng);
  }
};

void run_growth(benchmark::State& st, double a, double alpha, int d) {
  GrownGraph g(a, alpha, d, st.range(0));
  for (auto _ : st) {
    g.state.step(g.rng);
    benchmark::DoNotOptimize(g.state.total_in_edges());
  }
  st.SetItemsProcessed(st.iterations());
}

void run_vertex_query(benchmark::State& st, double a, double alpha, int d) {
  const GrownGraph g(a, alpha, d, st.range(0));
  sapa::RngStream qrng = sapa::derive_stream(7, 1);
  for (auto _ : st) {
    const auto hits = g.state.vertex_step(qrng.next_double());
    benchmark::DoNotOptimize(hits.data());
  }
  st.SetItemsProcessed(st.iterations());
}

void run_edge_query(benchmark::State& st, double a, double alpha, int d) {
  const GrownGraph g(a, alpha, d, st.range(0));
  sapa::RngStream qrng = sapa::derive_stream(7, 2);
  const std::int32_t incoming_id = g.state.vertex_count();
  for (auto _ : st) {
    const auto outcome = g.state.edge_step(incoming_id, qrng);
    benchmark::DoNotOptimize(outcome.targets.data());
  }
  st.SetItemsProcessed(st.iterations());
}

}  // namespace

BENCHMARK_CAPTURE(run_growth, subcritical, 0.2, 0.2, 1)
    ->Arg(10000)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(run_growth, critical, 0.4, 0.3, 2)
    ->Arg(10000)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(run_growth, supercritical, 0.5, 0.3, 2)
    ->Arg(10000)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_CAPTURE(run_vertex_query, subcritical, 0.2, 0.2, 1)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(run_vertex_query, supercritical, 0.5, 0.3, 2)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_CAPTURE(run_edge_query, subcritical, 0.2, 0.2, 1)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(run_edge_query, supercritical, 0.5, 0.3, 2)
    ->Arg(100000)
    ->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
