#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "sapa/rng.hpp"
#include "sapa/torus_index.hpp"

using namespace sapa;

namespace {

struct Mirror {
  std::map<std::int32_t, std::pair<double, long>> verts;  // id -> (pos, degree)

  std::vector<std::int32_t> query(double x, double np, double a, double b) const {
    std::vector<std::int32_t> out;
    for (const auto& [id, pd] : verts) {
      const double radius = std::min(0.5, (a * static_cast<double>(pd.second) + b) / (2.0 * np));
      if (TorusIndex::torus_dist(x, pd.first) < radius) out.push_back(id);
    }
    return out;
  }
};

std::vector<std::int32_t> sorted(std::vector<std::int32_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_SUITE("torus_index") {
  TEST_CASE("torus_dist wraps around") {
    CHECK(TorusIndex::torus_dist(0.1, 0.9) == doctest::Approx(0.2));
    CHECK(TorusIndex::torus_dist(0.0, 0.5) == 0.5);
    CHECK(TorusIndex::torus_dist(0.3, 0.3) == 0.0);
    CHECK(TorusIndex::torus_dist(0.99, 0.01) == doctest::Approx(0.02));
    CHECK(TorusIndex::torus_dist(0.25, 0.75) == 0.5);  // both arcs equal
  }

  TEST_CASE("constructor and mutation validation") {
    CHECK_THROWS_AS(TorusIndex(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TorusIndex(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TorusIndex(0.5, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TorusIndex(0.5, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(TorusIndex(0.5, 1.0, 0.01, 0.5), std::invalid_argument);

    TorusIndex idx(0.5, 1.0);
    CHECK_THROWS_AS(idx.insert(-1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(idx.insert(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(idx.insert(0, -0.2), std::invalid_argument);
    idx.insert(0, 0.5);
    CHECK_THROWS_AS(idx.insert(0, 0.25), std::logic_error);
    CHECK_THROWS_AS(idx.bump_degree(3, 1, 2.0), std::invalid_argument);
    CHECK(idx.vertex_count() == 1);
  }

  TEST_CASE("fresh vertex ball at n' = 10: inside, outside, wrapped") {
    TorusIndex idx(0.5, 1.0, 0.01, 10.0);
    idx.insert(0, 0.50);
    idx.insert(1, 0.99);
    // degree 0 with a=0.5, b=1: ball length min(1, 1) => radius 1/(2*10) = 0.05
    CHECK(idx.query_balls(0.52, 10.0, 0.5, 1.0) == std::vector<std::int32_t>{0});
    CHECK(idx.query_balls(0.56, 10.0, 0.5, 1.0).empty());
    CHECK(idx.query_balls(0.01, 10.0, 0.5, 1.0) == std::vector<std::int32_t>{1});
  }

  TEST_CASE("boundary is strict: distance equal to radius misses") {
    // dyadic positions and radius make every comparison exact
    TorusIndex idx(0.5, 1.0, 0.5, 1.0);
    idx.insert(0, 0.25);
    // n' = 2: radius = min(1, 1)/4 = 0.25; dist(0.5, 0.25) = 0.25 exactly
    CHECK(idx.query_balls(0.5, 2.0, 0.5, 1.0).empty());
    const double just_inside = std::nextafter(0.5, 0.0);
    CHECK(idx.query_balls(just_inside, 2.0, 0.5, 1.0) == std::vector<std::int32_t>{0});
  }

  TEST_CASE("light tier: exact dyadic grid, window accounting") {
    // 256 vertices at i/256; delta = 1/128 gives 128 cells of 2 vertices each.
    TorusIndex idx(0.5, 1.0, 1.0 / 128.0, 64.0);
    for (int i = 0; i < 256; ++i)
      idx.insert(static_cast<std::int32_t>(i), static_cast<double>(i) / 256.0);
    CHECK(idx.heavy_count() == 0);  // radius bound 1/128 == delta: stays light
    idx.reset_stats();

    // radius = 1/128 = 2/256 at n' = 64; hits are the open window (x-2, x+2)/256
    const double x = 40.5 / 256.0;
    const std::vector<std::int32_t> want = {39, 40, 41, 42};
    CHECK(sorted(idx.query_balls(x, 64.0, 0.5, 1.0)) == want);

    // query at a vertex position: distance exactly 2/256 is excluded
    const std::vector<std::int32_t> want_strict = {41, 42, 43};
    CHECK(sorted(idx.query_balls(42.0 / 256.0, 64.0, 0.5, 1.0)) == want_strict);

    const TorusIndex::Stats& st = idx.stats();
    CHECK(st.queries == 2);
    CHECK(st.heavy_touched == 0);
    CHECK(st.hits == 7);
    CHECK(st.light_touched <= 2 * 6);  // at most 3 cells x 2 vertices per query
  }

  TEST_CASE("bump promotes to heavy only when the radius outgrows delta") {
    TorusIndex idx(1.0, 0.1, 0.01, 30.0);
    idx.insert(0, 0.3);
    idx.insert(1, 0.7);
    CHECK(idx.heavy_count() == 0);  // radius bound 0.1/60 < 0.01
    idx.bump_degree(0, 1, 30.0);    // radius 1.1/60 > 0.01
    CHECK(idx.heavy_count() == 1);
    idx.bump_degree(1, 1, 200.0);  // same degree at larger n': 1.1/400 stays light
    CHECK(idx.heavy_count() == 1);

    // promoted vertex is still found through the heavy tier (n' keeps growing)
    idx.reset_stats();
    const auto out = idx.query_balls(0.301, 200.0, 1.0, 0.1);
    CHECK(out == std::vector<std::int32_t>{0});
    CHECK(idx.stats().heavy_touched == 1);
  }

  TEST_CASE("all-heavy index degenerates to an exhaustive scan") {
    TorusIndex idx(0.3, 1.0, 1e-4, 1.0);  // b/(2*1) = 0.5 >> delta: all heavy
    Mirror mirror;
    RngStream rng(13, 0);
    for (std::int32_t id = 0; id < 50; ++id) {
      const double pos = rng.next_double();
      idx.insert(id, pos);
      mirror.verts[id] = {pos, 0};
    }
    CHECK(idx.heavy_count() == 50);
    for (int t = 0; t < 200; ++t) {
      const double x = rng.next_double();
      CHECK(sorted(idx.query_balls(x, 50.0, 0.3, 1.0)) == mirror.query(x, 50.0, 0.3, 1.0));
    }
  }

  TEST_CASE("fuzz against a naive scan through inserts, bumps, growing n'") {
    // initial n' = 200 keeps degree-0 inserts light (0.75/400 <= delta), so the
    // bump rounds split the population across both tiers
    const double a = 0.4, b = 0.75, delta = 0.002;
    TorusIndex idx(a, b, delta, 200.0);
    Mirror mirror;
    RngStream rng(1717, 0);

    for (std::int32_t id = 0; id < 400; ++id) {
      if (id % 97 == 3) continue;  // leave gaps in the id space
      double pos = rng.next_double();
      if (id % 50 == 7 && !mirror.verts.empty()) pos = mirror.verts.begin()->second.first;
      idx.insert(id, pos);
      mirror.verts[id] = {pos, 0};
    }
    CHECK(idx.vertex_count() == mirror.verts.size());

    const double rounds_np[] = {200.0, 400.0, 900.0};
    for (double np : rounds_np) {
      for (int k = 0; k < 150; ++k) {
        auto it = mirror.verts.begin();
        std::advance(it, rng.next_index(static_cast<long>(mirror.verts.size())));
        ++it->second.second;
        idx.bump_degree(it->first, it->second.second, np);
      }
      std::vector<double> xs;
      for (int t = 0; t < 150; ++t) xs.push_back(rng.next_double());
      for (long k : {0L, 1L, 17L, 250L, 499L}) xs.push_back(static_cast<double>(k) * delta);
      xs.push_back(std::nextafter(1.0, 0.0));
      int checked = 0;
      for (double x : xs) {
        const auto got = sorted(idx.query_balls(x, np, a, b));
        const auto want = mirror.query(x, np, a, b);
        REQUIRE(got == want);
        ++checked;
      }
      CHECK(checked > 150);
    }
    CHECK(idx.stats().queries == 3 * (150 + 5 + 1));
    CHECK(idx.heavy_count() > 0);  // round-one bumps at n' = 200 promote
    CHECK(idx.heavy_count() < idx.vertex_count());
  }
}
