#include "sapa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "sapa/theory.hpp"

namespace sapa {

namespace {

struct Ols {
  double slope = 0.0;
  double stderr_slope = 0.0;
  long points = 0;
};

Ols fit_line(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<long>(xs.size());
  double mx = 0.0, my = 0.0;
  for (long i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (long i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  Ols fit;
  fit.points = n;
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  if (n > 2) {
    double ss_res = 0.0;
    for (long i = 0; i < n; ++i) {
      const double r = ys[i] - my - fit.slope * (xs[i] - mx);
      ss_res += r * r;
    }
    fit.stderr_slope = std::sqrt(std::max(0.0, ss_res / static_cast<double>(n - 2) / sxx));
  }
  return fit;
}

}  // namespace

std::optional<ExponentFit> estimate_exponent(std::span<const TimeSeriesRow> series, long n_lo,
                                             long n_hi) {
  std::vector<double> xs, ys;
  for (const TimeSeriesRow& row : series) {
    if (row.n < n_lo || row.n > n_hi || row.n <= 0) continue;
    if (row.m_ranks.empty() || row.m_ranks[0] <= 0) continue;
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(static_cast<double>(row.m_ranks[0])));
  }
  if (xs.size() < 10) return std::nullopt;
  const Ols fit = fit_line(xs, ys);
  return ExponentFit{fit.slope, fit.stderr_slope, fit.points};
}

RatioReport check_ratio(std::span<const TimeSeriesRow> series, double target, RatioKind kind,
                        int k) {
  const auto ratio_of = [&](const TimeSeriesRow& row) {
    const double n = static_cast<double>(row.n);
    if (kind == RatioKind::m_k_over_n) {
      const std::size_t idx = static_cast<std::size_t>(k) - 1;
      return static_cast<double>(idx < row.m_ranks.size() ? row.m_ranks[idx] : 0) / n;
    }
    return static_cast<double>(row.m_ranks.empty() ? 0 : row.m_ranks[0]) * std::log(n) / n;
  };

  RatioReport report;
  std::vector<const TimeSeriesRow*> usable;
  for (const TimeSeriesRow& row : series)
    if (row.n >= 1) usable.push_back(&row);
  if (usable.empty()) return report;

  report.final_ratio = ratio_of(*usable.back());
  report.deviation = std::fabs(report.final_ratio - target);

  const std::size_t start = usable.size() / 2;
  report.points = static_cast<long>(usable.size() - start);
  long pairs = 0, non_worsening = 0;
  for (std::size_t i = start + 1; i < usable.size(); ++i) {
    const double before = std::fabs(ratio_of(*usable[i - 1]) - target);
    const double after = std::fabs(ratio_of(*usable[i]) - target);
    ++pairs;
    if (after <= before) ++non_worsening;
  }
  if (pairs > 0) report.trend = static_cast<double>(non_worsening) / static_cast<double>(pairs);
  return report;
}

DriftAccumulator::DriftAccumulator(const ModelParams& params, int ranks, long n_min)
    : params_(params), ranks_(ranks), n_min_(std::max<long>(1, n_min)) {
  long b = n_min_;
  boundaries_.push_back(b);
  while (b < params_.steps) {
    b = std::max(b + 1, static_cast<long>(std::llround(static_cast<double>(b) * 1.5)));
    boundaries_.push_back(b);
  }
  const std::size_t buckets = boundaries_.size() - 1;
  sums_.assign(static_cast<std::size_t>(std::max(0, ranks_)),
               std::vector<BucketSums>(buckets));
  prev_m_.assign(static_cast<std::size_t>(ranks_) + 1, 0);
  z_scratch_.assign(static_cast<std::size_t>(ranks_), 0.0);
}

void DriftAccumulator::operator()(const GraphState& state, const StepReport& /*report*/) {
  const int tracked = ranks_ + 1;
  cur_scratch_.assign(static_cast<std::size_t>(tracked), 0);
  std::vector<long>& cur = cur_scratch_;
  state.registry().top_degrees(tracked, cur.data());

  if (have_prev_ && ranks_ > 0 && prev_n_ >= n_min_ && prev_n_ < boundaries_.back() &&
      !sums_.empty() && !sums_[0].empty()) {
    const auto upper =
        std::upper_bound(boundaries_.begin(), boundaries_.end(), prev_n_);
    const auto bucket = static_cast<std::size_t>(upper - boundaries_.begin()) - 1;
    const double np = static_cast<double>(prev_n_ + params_.n0);
    for (int k = 1; k <= ranks_; ++k) {
      const std::size_t i = static_cast<std::size_t>(k) - 1;
      const bool upper_distinct = k == 1 || prev_m_[i - 1] > prev_m_[i];
      const bool lower_distinct = prev_m_[i] > prev_m_[i + 1];
      if (!upper_distinct || !lower_distinct) continue;
      for (int j = 0; j < k; ++j)
        z_scratch_[static_cast<std::size_t>(j)] =
            static_cast<double>(prev_m_[static_cast<std::size_t>(j)]) / np;
      const double predicted =
          drift(k, std::span<const double>(z_scratch_.data(), static_cast<std::size_t>(k)),
                params_);
      const double observed = static_cast<double>(cur[i] - prev_m_[i]);
      const double dev = observed - predicted;
      BucketSums& s = sums_[i][bucket];
      ++s.count;
      s.sum_dev += dev;
      s.sum_dev2 += dev * dev;
    }
  }

  prev_m_.assign(cur.begin(), cur.end());
  prev_n_ = state.step_count();
  have_prev_ = true;
}

void DriftAccumulator::merge(const DriftAccumulator& other) {
  if (other.sums_.size() != sums_.size() || other.boundaries_ != boundaries_)
    throw std::logic_error("DriftAccumulator::merge: incompatible bucket layouts");
  for (std::size_t r = 0; r < sums_.size(); ++r)
    for (std::size_t i = 0; i < sums_[r].size(); ++i) {
      sums_[r][i].count += other.sums_[r][i].count;
      sums_[r][i].sum_dev += other.sums_[r][i].sum_dev;
      sums_[r][i].sum_dev2 += other.sums_[r][i].sum_dev2;
    }
}

std::vector<DriftAccumulator::BucketReport> DriftAccumulator::finalize(long min_count) const {
  std::vector<BucketReport> out;
  for (std::size_t r = 0; r < sums_.size(); ++r)
    for (std::size_t i = 0; i < sums_[r].size(); ++i) {
      const BucketSums& s = sums_[r][i];
      if (s.count < min_count) continue;
      BucketReport rep;
      rep.n_lo = boundaries_[i];
      rep.n_hi = boundaries_[i + 1];
      rep.rank = static_cast<int>(r) + 1;
      rep.count = s.count;
      rep.mean_dev = s.sum_dev / static_cast<double>(s.count);
      const double var = (s.sum_dev2 - static_cast<double>(s.count) * rep.mean_dev * rep.mean_dev) /
                         static_cast<double>(s.count - 1);
      const double sd = std::sqrt(std::max(0.0, var));
      if (sd > 0.0)
        rep.z = rep.mean_dev * std::sqrt(static_cast<double>(s.count)) / sd;
      else
        rep.z = rep.mean_dev == 0.0 ? 0.0 : std::copysign(1e18, rep.mean_dev);
      out.push_back(rep);
    }
  return out;
}

namespace {

ReplicaSummary run_one_replica(const ModelParams& params, int replica_id,
                               const ReplicaOptions& opts) {
  RngStream rng = derive_stream(params.seed, static_cast<std::uint64_t>(replica_id));
  std::optional<DriftAccumulator> acc;
  StepObserver on_step;
  if (opts.drift_ranks > 0) {
    acc.emplace(params, opts.drift_ranks, opts.drift_n_min);
    on_step = [&acc](const GraphState& s, const StepReport& r) { (*acc)(s, r); };
  }
  std::vector<TimeSeriesRow> series = run(params, rng, {}, on_step);

  ReplicaSummary summary;
  summary.replica_id = replica_id;
  const TimeSeriesRow& last = series.back();
  summary.final_n = last.n;
  summary.final_m = last.m_ranks;
  summary.final_ratio.resize(last.m_ranks.size(), 0.0);
  if (last.n >= 1)
    for (std::size_t i = 0; i < last.m_ranks.size(); ++i)
      summary.final_ratio[i] =
          static_cast<double>(last.m_ranks[i]) / static_cast<double>(last.n);
  if (last.n >= 2 && !last.m_ranks.empty())
    summary.m1_logn_over_n = static_cast<double>(last.m_ranks[0]) *
                             std::log(static_cast<double>(last.n)) /
                             static_cast<double>(last.n);
  const long w_lo = opts.exponent_window ? opts.exponent_window->first
                                         : std::max<long>(1, params.steps / 100);
  const long w_hi = opts.exponent_window ? opts.exponent_window->second : params.steps;
  summary.exponent = estimate_exponent(series, w_lo, w_hi);
  if (opts.keep_series) summary.series = std::move(series);
  summary.drift = std::move(acc);
  return summary;
}

}  // namespace

std::vector<ReplicaSummary> run_replicas(const ModelParams& params, int replica_count,
                                         int parallelism, const ReplicaOptions& opts) {
  if (replica_count < 1) throw std::invalid_argument("run_replicas: need replica_count >= 1");
  std::vector<ReplicaSummary> out(static_cast<std::size_t>(replica_count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(replica_count));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (int r = next.fetch_add(1); r < replica_count; r = next.fetch_add(1)) {
      try {
        out[static_cast<std::size_t>(r)] = run_one_replica(params, r, opts);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };

  const int jobs = std::clamp(parallelism, 1, replica_count);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

EnsembleStats ensemble_of(std::span<const double> values) {
  EnsembleStats stats;
  stats.count = static_cast<int>(values.size());
  if (stats.count == 0) return stats;
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(stats.count);
  if (stats.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(stats.count - 1));
    stats.stderr_mean = stats.stddev / std::sqrt(static_cast<double>(stats.count));
  }
  return stats;
}

}  // namespace sapa
