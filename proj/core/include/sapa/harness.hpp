#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sapa/model.hpp"
#include "sapa/params.hpp"

namespace sapa {

struct ExponentFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  long points = 0;
};

// Least-squares slope of log M_1 against log n over checkpoints with
// n in [n_lo, n_hi] and M_1 > 0. Needs at least 10 usable checkpoints,
// otherwise returns nullopt.
std::optional<ExponentFit> estimate_exponent(std::span<const TimeSeriesRow> series, long n_lo,
                                             long n_hi);

enum class RatioKind { m_k_over_n, m1_logn_over_n };

struct RatioReport {
  double final_ratio = 0.0;
  double deviation = 0.0;  // |final_ratio - target|
  double trend = 0.0;      // fraction of non-worsening consecutive pairs
  long points = 0;         // rows with n >= 1 entering the trend statistic
};

// Final-row ratio (M_k/n or M_1*ln(n)/n) against a target, plus a monotone
// trend statistic: over the last half of the n >= 1 checkpoints, the fraction
// of consecutive pairs where |ratio - target| does not increase (1.0 on a
// series sitting constant at the target).
RatioReport check_ratio(std::span<const TimeSeriesRow> series, double target, RatioKind kind,
                        int k = 1);

// Empirical one-step increments of the ranked degrees M_k versus the
// theoretical mean increment evaluated at the pre-step normalized degrees,
// pooled into geometric buckets of n (factor 3/2) starting at n_min.
// Steps where rank k is not uniquely attained (M_{k-1} = M_k or
// M_k = M_{k+1}) are excluded for that rank.
class DriftAccumulator {
 public:
  struct BucketSums {
    long count = 0;
    double sum_dev = 0.0;   // sum of (observed - predicted)
    double sum_dev2 = 0.0;  // sum of squares
  };
  struct BucketReport {
    long n_lo = 0;
    long n_hi = 0;  // [n_lo, n_hi)
    int rank = 1;
    long count = 0;
    double mean_dev = 0.0;
    double z = 0.0;  // mean_dev / (sd/sqrt(count))
  };

  DriftAccumulator(const ModelParams& params, int ranks, long n_min = 10000);

  // Observer hook: call after every committed step with the post-step state.
  void operator()(const GraphState& state, const StepReport& report);

  int ranks() const { return ranks_; }
  long n_min() const { return n_min_; }
  std::span<const long> boundaries() const { return boundaries_; }
  // sums()[rank-1][bucket]
  const std::vector<std::vector<BucketSums>>& sums() const { return sums_; }

  void merge(const DriftAccumulator& other);  // pool another replica's sums
  // Buckets with at least min_count observations, z computed per bucket.
  std::vector<BucketReport> finalize(long min_count = 100) const;

 private:
  ModelParams params_;
  int ranks_;
  long n_min_;
  std::vector<long> boundaries_;  // bucket i = [boundaries_[i], boundaries_[i+1])
  std::vector<std::vector<BucketSums>> sums_;
  bool have_prev_ = false;
  std::vector<long> prev_m_;  // M_1..M_{ranks+1} before the upcoming step
  long prev_n_ = 0;
  std::vector<double> z_scratch_;
  std::vector<long> cur_scratch_;
};

struct ReplicaSummary {
  int replica_id = 0;
  long final_n = 0;
  std::vector<long> final_m;            // M_1..M_track_k
  std::vector<double> final_ratio;      // M_k/n
  double m1_logn_over_n = 0.0;
  std::optional<ExponentFit> exponent;  // over the requested window
  std::vector<TimeSeriesRow> series;    // empty when keep_series is off
  std::optional<DriftAccumulator> drift;
};

struct ReplicaOptions {
  int drift_ranks = 0;  // 0: skip drift collection
  long drift_n_min = 10000;
  // Exponent window; default = last two decades [steps/100, steps].
  std::optional<std::pair<long, long>> exponent_window;
  bool keep_series = true;
};

// Replica r runs with derive_stream(params.seed, r). Results are aggregated
// by replica id, so they are identical for any parallelism degree and any
// completion order. Worker exceptions propagate to the caller.
std::vector<ReplicaSummary> run_replicas(const ModelParams& params, int replica_count,
                                         int parallelism, const ReplicaOptions& opts = {});

struct EnsembleStats {
  double mean = 0.0;
  double stddev = 0.0;       // sample standard deviation
  double stderr_mean = 0.0;  // stddev / sqrt(count)
  int count = 0;
};

EnsembleStats ensemble_of(std::span<const double> values);

}  // namespace sapa
