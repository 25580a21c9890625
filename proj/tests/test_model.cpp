#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sapa/model.hpp"
#include "sapa/params.hpp"
#include "sapa/rng.hpp"
#include "sapa/torus_index.hpp"

using namespace sapa;

namespace {

ModelParams small_params() {
  ModelParams p;
  p.a = 0.3;
  p.b = 1.0;
  p.alpha = 0.25;
  p.beta = 1.0;
  p.d = 2;
  p.max_m = 1;
  p.m_dist = {1.0};
  p.n0 = 8;
  p.steps = 300;
  p.seed = 99;
  p.track_k = 3;
  p.checkpoint_stride = 10;
  p.validate();
  return p;
}

struct Snapshot {
  double n_prime;
  std::vector<double> pos;
  std::vector<long> deg;
};

Snapshot snapshot_of(const GraphState& state) {
  Snapshot s;
  s.n_prime = state.n_prime();
  for (std::int32_t id = 0; id < state.vertex_count(); ++id) {
    const VertexRecord v = state.vertex(id);
    s.pos.push_back(v.position);
    s.deg.push_back(v.in_degree);
  }
  return s;
}

std::vector<std::int32_t> ball_oracle(const Snapshot& s, double x, double a, double b) {
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < s.pos.size(); ++i) {
    const double radius =
        std::min(0.5, (a * static_cast<double>(s.deg[i]) + b) / (2.0 * s.n_prime));
    if (TorusIndex::torus_dist(x, s.pos[i]) < radius) out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("fresh state: seed vertices only, everything consistent") {
    const ModelParams p = small_params();
    RngStream rng(p.seed, 0);
    GraphState state(p, rng);
    CHECK(state.vertex_count() == p.n0);
    CHECK(state.step_count() == 0);
    CHECK(state.n_prime() == static_cast<double>(p.n0));
    CHECK(state.total_in_edges() == 0);
    for (std::int32_t id = 0; id < p.n0; ++id) {
      const VertexRecord v = state.vertex(id);
      CHECK(v.id == id);
      CHECK(v.in_degree == 0);
      CHECK(v.position >= 0.0);
      CHECK(v.position < 1.0);
    }
    CHECK(state.kth_degree(1) == 0);
    CHECK(state.audit());
  }

  TEST_CASE("auto_delta stays inside its clamp for extreme sizes") {
    ModelParams p = small_params();
    p.steps = 0;
    CHECK(auto_delta(p) <= 0.01);
    CHECK(auto_delta(p) >= 0x1.0p-20);
    p.steps = 200'000'000;
    CHECK(auto_delta(p) >= 0x1.0p-20);
    CHECK(auto_delta(p) <= 0.01);
  }

  TEST_CASE("vertex_step equals a scan over the vertex records") {
    const ModelParams p = small_params();
    RngStream rng(p.seed, 1);
    GraphState state(p, rng);
    for (int i = 0; i < 120; ++i) state.step(rng);

    const Snapshot snap = snapshot_of(state);
    for (int t = 0; t < 200; ++t) {
      const double x = rng.next_double();
      auto got = state.vertex_step(x);
      std::sort(got.begin(), got.end());
      CHECK(got == ball_oracle(snap, x, p.a, p.b));
    }
    CHECK_THROWS_AS(state.vertex_step(1.0), std::invalid_argument);
    CHECK_THROWS_AS(state.vertex_step(-0.5), std::invalid_argument);
  }

  TEST_CASE("step: snapshot accounting, target invariants, audits") {
    ModelParams p = small_params();
    p.max_m = 2;
    p.m_dist = {0.3, 0.7};
    p.validate();
    RngStream rng(p.seed, 2);
    GraphState state(p, rng);

    long m2_count = 0;
    for (int stepno = 0; stepno < 300; ++stepno) {
      const Snapshot before = snapshot_of(state);
      const long e_before = state.total_in_edges();
      const std::int32_t new_id = state.vertex_count();

      const StepReport rep = state.step(rng);

      CHECK(rep.step_index == stepno);
      REQUIRE(state.vertex_count() == new_id + 1);

      // locality edges match the ball oracle evaluated on the pre-step snapshot
      const double x_new = state.vertex(new_id).position;
      std::vector<std::int32_t> vt = rep.vertex_step_targets;
      std::sort(vt.begin(), vt.end());
      CHECK(vt == ball_oracle(before, x_new, p.a, p.b));

      // sampled edges: exactly m_n distinct ids from the pool minus the source
      REQUIRE(rep.m_n >= 1);
      REQUIRE(rep.m_n <= p.max_m);
      if (rep.m_n == 2) ++m2_count;
      CHECK(rep.edge_source >= 0);
      CHECK(rep.edge_source <= new_id);
      REQUIRE(static_cast<int>(rep.edge_step_targets.size()) == rep.m_n);
      CHECK(rep.fill_count >= 0);
      CHECK(rep.fill_count <= rep.m_n);
      std::vector<std::int32_t> et = rep.edge_step_targets;
      std::sort(et.begin(), et.end());
      CHECK(std::adjacent_find(et.begin(), et.end()) == et.end());
      for (std::int32_t id : et) {
        CHECK(id != rep.edge_source);
        CHECK(id >= 0);
        CHECK(id <= new_id);
      }

      // edge total and per-vertex degrees advance by the committed targets
      const long added = static_cast<long>(rep.vertex_step_targets.size()) +
                         static_cast<long>(rep.edge_step_targets.size());
      CHECK(state.total_in_edges() == e_before + added);
      std::vector<long> want_deg = before.deg;
      want_deg.push_back(0);
      for (std::int32_t id : rep.vertex_step_targets) ++want_deg[static_cast<std::size_t>(id)];
      for (std::int32_t id : rep.edge_step_targets) ++want_deg[static_cast<std::size_t>(id)];
      for (std::int32_t id = 0; id <= new_id; ++id)
        CHECK(state.vertex(id).in_degree == want_deg[static_cast<std::size_t>(id)]);

      if (stepno % 50 == 0) REQUIRE(state.audit());
    }
    REQUIRE(state.audit());

    // the edge-count draw follows m_dist
    const double frac = static_cast<double>(m2_count) / 300.0;
    CHECK(std::fabs(frac - 0.7) <= 5.0 * std::sqrt(0.21 / 300.0));
  }

  TEST_CASE("top-rank degree can rise by at most two per step when m == 1") {
    const ModelParams p = small_params();
    RngStream rng(p.seed, 3);
    GraphState state(p, rng);
    long m1 = state.kth_degree(1);
    for (int i = 0; i < 250; ++i) {
      state.step(rng);
      const long next = state.kth_degree(1);
      CHECK(next >= m1);
      CHECK(next <= m1 + 2);
      m1 = next;
    }
  }

  TEST_CASE("edge_step: repeatable, pure, and id-checked") {
    const ModelParams p = small_params();
    RngStream rng(p.seed, 4);
    GraphState state(p, rng);
    for (int i = 0; i < 60; ++i) state.step(rng);

    const std::int32_t new_id = state.vertex_count();
    const long e_before = state.total_in_edges();
    RngStream r1(7, 7), r2(7, 7);
    const auto o1 = state.edge_step(new_id, r1);
    const auto o2 = state.edge_step(new_id, r2);
    CHECK(o1.u_n == o2.u_n);
    CHECK(o1.m_n == o2.m_n);
    CHECK(o1.targets == o2.targets);
    CHECK(o1.fill_count == o2.fill_count);

    // no mutation happened
    CHECK(state.vertex_count() == new_id);
    CHECK(state.total_in_edges() == e_before);
    CHECK(state.audit());

    CHECK_THROWS_AS(state.edge_step(new_id + 1, r1), std::invalid_argument);
    CHECK_THROWS_AS(state.edge_step(new_id - 1, r1), std::invalid_argument);
  }

  TEST_CASE("edge_step with saturated probabilities picks the top degrees") {
    ModelParams p = small_params();
    p.beta = 1e9;  // inclusion probability clamps to 1 for every candidate
    p.max_m = 2;
    p.m_dist = {0.0, 1.0};
    p.validate();
    RngStream rng(p.seed, 5);
    GraphState state(p, rng);
    for (int i = 0; i < 80; ++i) state.step(rng);

    const Snapshot snap = snapshot_of(state);
    RngStream er(11, 0);
    for (int t = 0; t < 50; ++t) {
      const auto out = state.edge_step(state.vertex_count(), er);
      CHECK(out.fill_count == 0);
      REQUIRE(out.targets.size() == 2);

      // candidate degrees: every current vertex plus the incoming one (0),
      // minus the source; the chosen pair must match the two largest
      std::vector<long> cand = snap.deg;
      cand.push_back(0);
      cand.erase(cand.begin() + out.u_n);
      std::sort(cand.begin(), cand.end(), std::greater<>());
      std::vector<long> got;
      for (std::int32_t id : out.targets)
        got.push_back(id == state.vertex_count() ? 0 : snap.deg[static_cast<std::size_t>(id)]);
      std::sort(got.begin(), got.end(), std::greater<>());
      CHECK(got[0] == cand[0]);
      CHECK(got[1] == cand[1]);
    }
  }

  TEST_CASE("run: checkpoint cadence, rank ordering, determinism") {
    ModelParams p = small_params();
    p.steps = 10;
    p.checkpoint_stride = 3;
    RngStream r1(p.seed, 0);
    const auto series = run(p, r1);
    std::vector<long> ns;
    for (const auto& row : series) ns.push_back(row.n);
    const std::vector<long> want = {0, 3, 6, 9, 10};
    CHECK(ns == want);
    for (const auto& row : series) {
      REQUIRE(row.m_ranks.size() == static_cast<std::size_t>(p.track_k));
      for (std::size_t k = 1; k < row.m_ranks.size(); ++k)
        CHECK(row.m_ranks[k - 1] >= row.m_ranks[k]);
    }
    CHECK(series.front().n == 0);
    CHECK(series.front().e_total == 0);

    RngStream r2(p.seed, 0);
    const auto replay = run(p, r2);
    REQUIRE(replay.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      CHECK(replay[i].n == series[i].n);
      CHECK(replay[i].e_total == series[i].e_total);
      CHECK(replay[i].m_ranks == series[i].m_ranks);
    }
  }

  TEST_CASE("run: zero steps emits the initial row only") {
    ModelParams p = small_params();
    p.steps = 0;
    RngStream rng(p.seed, 0);
    const auto series = run(p, rng);
    REQUIRE(series.size() == 1);
    CHECK(series[0].n == 0);
    CHECK(series[0].e_total == 0);
    for (long m : series[0].m_ranks) CHECK(m == 0);
  }

  TEST_CASE("run: observers see every step and every emitted row") {
    ModelParams p = small_params();
    p.steps = 25;
    p.checkpoint_stride = 4;
    RngStream rng(p.seed, 0);
    long rows = 0, steps = 0, edges_from_reports = 0;
    const auto series = run(
        p, rng, [&](const TimeSeriesRow&) { ++rows; },
        [&](const GraphState& st, const StepReport& rep) {
          ++steps;
          edges_from_reports += static_cast<long>(rep.vertex_step_targets.size()) +
                                static_cast<long>(rep.edge_step_targets.size());
          CHECK(st.step_count() == rep.step_index + 1);
        });
    CHECK(rows == static_cast<long>(series.size()));
    CHECK(steps == 25);
    CHECK(edges_from_reports == series.back().e_total);
  }
}
