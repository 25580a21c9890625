#include "sapa/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sapa/samplers.hpp"

namespace sapa {

double auto_delta(const ModelParams& params) {
  // Stationary mean in-degree heuristic: per step the locality edges add about
  // a*ebar + b and the sampled step adds mean_m, so ebar ~ (b + mean_m)/(1-a).
  const double ebar = (params.b + params.mean_m()) / (1.0 - params.a);
  const double n_fin = static_cast<double>(params.n0 + params.steps);
  const double raw = std::sqrt(std::max(1.0, params.a * ebar + params.b) * n_fin) / n_fin;
  return std::clamp(raw, 0x1.0p-20, 0.01);
}

GraphState::GraphState(const ModelParams& params, RngStream& rng)
    : params_(params),
      index_(params.a, params.b, auto_delta(params), static_cast<double>(params.n0)) {
  params_.validate();
  pos_.reserve(static_cast<std::size_t>(params_.n0 + params_.steps));
  deg_.reserve(pos_.capacity());
  for (std::int32_t id = 0; id < params_.n0; ++id) {
    const double x = rng.next_double();
    pos_.push_back(x);
    deg_.push_back(0);
    registry_.insert_vertex(id, 0);
    index_.insert(id, x);
  }
}

std::vector<std::int32_t> GraphState::vertex_step(double x_new) const {
  if (!(x_new >= 0.0 && x_new < 1.0))
    throw std::invalid_argument("GraphState::vertex_step: position outside [0, 1)");
  return index_.query_balls(x_new, n_prime(), params_.a, params_.b);
}

GraphState::EdgeStepOutcome GraphState::edge_step(std::int32_t new_vertex_id,
                                                  RngStream& rng) const {
  if (new_vertex_id != vertex_count())
    throw std::invalid_argument("GraphState::edge_step: new vertex id must be the next id");
  const long pool = static_cast<long>(new_vertex_id) + 1;

  // m_n by inverse CDF over m_dist (values 1..max_m). Only an entry with
  // positive mass can newly satisfy u < cum; if rounding leaves u beyond the
  // total, fall back to the last positive entry.
  int m_n = 0;
  {
    const double u = rng.next_double();
    double cum = 0.0;
    for (int r = 1; r <= params_.max_m; ++r) {
      cum += params_.m_dist[static_cast<std::size_t>(r - 1)];
      if (u < cum) {
        m_n = r;
        break;
      }
    }
    if (m_n == 0) {
      for (int r = params_.max_m; r >= 1 && m_n == 0; --r)
        if (params_.m_dist[static_cast<std::size_t>(r - 1)] > 0.0) m_n = r;
    }
  }

  const auto u_n = static_cast<std::int32_t>(rng.next_index(pool));

  const double np = n_prime();
  const double alpha = params_.alpha;
  const double beta = params_.beta;
  const std::int32_t exclusions[1] = {u_n};
  const std::int32_t extras[1] = {new_vertex_id};
  class_union_sample(
      registry_, exclusions, extras,
      [&](long g) { return std::min(1.0, (alpha * static_cast<double>(g) + beta) / np); },
      params_.d, rng, union_buf_);

  EdgeStepOutcome out;
  out.u_n = u_n;
  out.m_n = m_n;
  const std::size_t from_union = std::min(union_buf_.size(), static_cast<std::size_t>(m_n));
  out.targets.assign(union_buf_.begin(), union_buf_.begin() + static_cast<long>(from_union));
  while (out.targets.size() < static_cast<std::size_t>(m_n)) {
    const auto id = static_cast<std::int32_t>(rng.next_index(pool));
    if (id == u_n) continue;
    if (std::find(out.targets.begin(), out.targets.end(), id) != out.targets.end()) continue;
    out.targets.push_back(id);
  }
  out.fill_count = static_cast<int>(out.targets.size() - from_union);
  return out;
}

void GraphState::commit_edge(std::int32_t target, double n_prime_snapshot) {
  ++deg_[target];
  ++e_total_;
  registry_.increment_degree(target);
  index_.bump_degree(target, deg_[target], n_prime_snapshot);
}

StepReport GraphState::step(RngStream& rng) {
  StepReport report;
  report.step_index = n_;
  const double np = n_prime();

  const double x_new = rng.next_double();
  report.vertex_step_targets = vertex_step(x_new);

  const std::int32_t new_id = vertex_count();
  EdgeStepOutcome edge = edge_step(new_id, rng);
  report.edge_source = edge.u_n;
  report.m_n = edge.m_n;
  report.edge_step_targets = std::move(edge.targets);
  report.fill_count = edge.fill_count;

  pos_.push_back(x_new);
  deg_.push_back(0);
  registry_.insert_vertex(new_id, 0);
  index_.insert(new_id, x_new);
  for (std::int32_t t : report.vertex_step_targets) commit_edge(t, np);
  for (std::int32_t t : report.edge_step_targets) commit_edge(t, np);
  ++n_;
  return report;
}

bool GraphState::audit() const {
  if (pos_.size() != deg_.size()) return false;
  if (static_cast<long>(pos_.size()) != params_.n0 + n_) return false;
  long sum = 0;
  for (long g : deg_) sum += g;
  if (sum != e_total_) return false;
  if (index_.vertex_count() != pos_.size()) return false;
  return registry_.audit(deg_);
}

std::vector<TimeSeriesRow> run(const ModelParams& params, RngStream& rng,
                               const RowObserver& on_row, const StepObserver& on_step) {
  GraphState state(params, rng);
  std::vector<TimeSeriesRow> series;
  const auto emit = [&]() {
    TimeSeriesRow row;
    row.n = state.step_count();
    row.e_total = state.total_in_edges();
    row.m_ranks.resize(static_cast<std::size_t>(params.track_k));
    state.top_degrees(params.track_k, row.m_ranks.data());
    series.push_back(row);
    if (on_row) on_row(series.back());
  };

  emit();
  for (long i = 1; i <= params.steps; ++i) {
    const StepReport report = state.step(rng);
    if (on_step) on_step(state, report);
    if (i % params.checkpoint_stride == 0 || i == params.steps) emit();
  }
  return series;
}

}  // namespace sapa
