#pragma once

#include <cstdint>
#include <vector>

namespace sapa {

// Point-location index over vertices on the unit torus, answering "whose ball
// contains x" where vertex i's ball has length min(1, (a*deg_i + b)/n'), i.e.
// radius min(1/2, (a*deg_i + b)/(2*n')).
//
// Two tiers: vertices whose radius can exceed the threshold delta live in a
// flat heavy list and are filtered exhaustively; all others are bucketed by
// position into cells of width ~delta, and a query scans only the cells
// overlapping the circular window [x - delta, x + delta] before applying the
// exact distance test. Promotion to heavy happens on insert/bump_degree;
// demotion never happens (radii only shrink as n' grows, so staying heavy is
// harmless for correctness and the heavy tier stays small).
//
// Preconditions for the light tier to be complete: the (a, b) passed to
// query_balls equal the constructor's, and the n' values seen by successive
// calls are non-decreasing (n' only grows in the simulated process).
class TorusIndex {
 public:
  struct Stats {
    std::uint64_t queries = 0;
    std::uint64_t light_touched = 0;  // light candidates distance-tested
    std::uint64_t heavy_touched = 0;  // heavy candidates distance-tested
    std::uint64_t hits = 0;
  };

  // initial_n_prime: the n' in effect when the first vertices are inserted
  // (smaller values are safe but over-promote).
  TorusIndex(double a, double b, double delta = 0.01, double initial_n_prime = 1.0);

  // id must be unused and non-negative; position in [0, 1).
  void insert(std::int32_t id, double position);
  // id must be present; n' is the current denominator (non-decreasing).
  void bump_degree(std::int32_t id, long new_degree, double n_prime);

  // Exactly the ids with torus_dist(x, pos_i) < min(1/2, (a*deg_i + b)/(2*n')),
  // strict inequality. Order unspecified.
  void query_balls(double x, double n_prime, double a, double b,
                   std::vector<std::int32_t>& out) const;
  std::vector<std::int32_t> query_balls(double x, double n_prime, double a, double b) const;

  std::size_t vertex_count() const { return live_; }
  std::size_t heavy_count() const { return heavy_.size(); }
  double delta() const { return delta_; }
  const Stats& stats() const { return stats_; }
  void reset_stats() { stats_ = Stats{}; }

  static double torus_dist(double x, double y);

 private:
  struct Slot {
    double pos = 0.0;
    long degree = -1;       // -1: id not present
    std::int32_t cell = -1; // -1: heavy
  };

  double radius_bound(long degree) const;  // radius at the smallest n' seen
  void promote(std::int32_t id);

  double a_, b_, delta_;
  mutable double np_floor_;  // largest n' observed (monotone bookkeeping)
  int ncells_;
  double cell_width_;
  std::vector<Slot> slots_;                       // indexed by id
  std::vector<std::vector<std::int32_t>> cells_;  // light tier buckets
  std::vector<std::int32_t> heavy_;
  std::size_t live_ = 0;
  mutable Stats stats_;
};

}  // namespace sapa
