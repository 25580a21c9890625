#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sapa/degree_registry.hpp"
#include "sapa/params.hpp"
#include "sapa/rng.hpp"
#include "sapa/torus_index.hpp"

namespace sapa {

struct VertexRecord {
  std::int32_t id;
  double position;  // torus coordinate in [0, 1)
  long in_degree;
};

struct StepReport {
  long step_index = 0;  // n before the step
  std::vector<std::int32_t> vertex_step_targets;
  std::int32_t edge_source = -1;  // u_n
  int m_n = 0;
  std::vector<std::int32_t> edge_step_targets;  // exactly m_n distinct, u_n excluded
  int fill_count = 0;  // targets supplied by the uniform top-up rule
};

struct TimeSeriesRow {
  long n = 0;
  long e_total = 0;
  std::vector<long> m_ranks;  // M_1(n) >= ... >= M_track_k(n)
};

// The growing graph: vertex positions on the unit torus, in-degrees, the
// degree-class registry and the spatial ball index (kept as consistent views
// of the committed graph), and the edge total E. One step appends a located
// vertex, performs the locality step and the sampled edge step against the
// pre-step snapshot, then commits all new edges at once.
class GraphState {
 public:
  GraphState(const ModelParams& params, RngStream& rng);

  const ModelParams& params() const { return params_; }
  long step_count() const { return n_; }
  double n_prime() const { return static_cast<double>(n_ + params_.n0); }
  long total_in_edges() const { return e_total_; }
  std::int32_t vertex_count() const { return static_cast<std::int32_t>(pos_.size()); }
  VertexRecord vertex(std::int32_t id) const { return {id, pos_[id], deg_[id]}; }
  const DegreeClassRegistry& registry() const { return registry_; }
  const TorusIndex& index() const { return index_; }
  TorusIndex& index() { return index_; }
  long kth_degree(int k) const { return registry_.kth_degree(k); }
  void top_degrees(int k, long* out) const { registry_.top_degrees(k, out); }

  // Exactly the ids i with torus_dist(x_new, pos_i) < min(1/2, (a*deg_i + b) /
  // (2 n')). Pure query; committing the edges is step()'s job.
  std::vector<std::int32_t> vertex_step(double x_new) const;

  struct EdgeStepOutcome {
    std::int32_t u_n;
    std::vector<std::int32_t> targets;
    int m_n;
    int fill_count;
  };
  // Samples m_n from m_dist, the source u_n uniformly over the pool of
  // vertex_count()+1 ids (the id one past the current range stands for the
  // incoming degree-0 vertex, itself an eligible candidate and source), then
  // d Bernoulli-inclusion samples with per-candidate probability
  // min(1, (alpha*deg + beta)/n'): targets are the m_n highest-degree distinct
  // members of the sample union (degree ties uniform), topped up uniformly
  // without replacement over the pool minus u_n when the union runs short.
  // Snapshot degrees throughout; no mutation.
  EdgeStepOutcome edge_step(std::int32_t new_vertex_id, RngStream& rng) const;

  // One full growth step: draw X uniform, evaluate vertex_step and edge_step
  // against the snapshot, then commit (append the vertex, add one in-edge per
  // target from either sub-step, update registry/index/E, advance n).
  StepReport step(RngStream& rng);

  // Cross-checks the cached E, the registry (full rebuild comparison), and
  // the index's vertex accounting against the flat arrays.
  bool audit() const;

 private:
  void commit_edge(std::int32_t target, double n_prime_snapshot);

  ModelParams params_;
  long n_ = 0;
  long e_total_ = 0;
  std::vector<double> pos_;
  std::vector<long> deg_;
  DegreeClassRegistry registry_;
  TorusIndex index_;
  mutable std::vector<std::int32_t> union_buf_;  // edge_step scratch
};

// Performance knob for the spatial index: window threshold balancing the
// per-query light-tier scan (~3*n*delta touches) against the heavy tier.
double auto_delta(const ModelParams& params);

using RowObserver = std::function<void(const TimeSeriesRow&)>;
using StepObserver = std::function<void(const GraphState&, const StepReport&)>;

// Runs `params.steps` steps from a fresh initial graph. Emits a row at n = 0,
// at every multiple of checkpoint_stride, and at the final step; on_step (if
// set) fires after every committed step. Observer exceptions propagate.
std::vector<TimeSeriesRow> run(const ModelParams& params, RngStream& rng,
                               const RowObserver& on_row = {}, const StepObserver& on_step = {});

}  // namespace sapa
