#include "sapa/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace sapa {

namespace {

// Inversion walk for Binomial(c, p) with p <= 1/2 and c*p <= 300, so the
// zero-term exp(c*log1p(-p)) stays far above the denormal range
// (c*|log1p(-p)| <= 2*c*p <= 600).
long binomial_by_inversion(long c, double p, RngStream& rng) {
  const double u = rng.next_double();
  double pmf = std::exp(static_cast<double>(c) * std::log1p(-p));
  double cdf = pmf;
  if (u < cdf) return 0;
  const double ratio = p / (1.0 - p);
  long k = 0;
  while (cdf <= u && k < c) {
    ++k;
    pmf *= ratio * static_cast<double>(c - k + 1) / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

long binomial_small_p(long c, double p, RngStream& rng) {
  if (static_cast<double>(c) * p <= 300.0) return binomial_by_inversion(c, p, rng);
  const long half = c / 2;
  return binomial_small_p(half, p, rng) + binomial_small_p(c - half, p, rng);
}

}  // namespace

long binomial(long c, double p, RngStream& rng) {
  if (c < 0 || !(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial: need c >= 0 and p in [0, 1]");
  if (c == 0 || p == 0.0) return 0;
  if (p == 1.0) return c;
  if (p > 0.5) return c - binomial_small_p(c, 1.0 - p, rng);
  return binomial_small_p(c, p, rng);
}

namespace detail {

double pow_int(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

long included_count(long eligible, double q, double cq_upper, RngStream& rng) {
  if (q >= 1.0) return eligible;
  if (q > 0.5 || cq_upper > 300.0) return binomial(eligible, q, rng);
  // The zero-squeeze certifies count 0 from one comparison, and is consistent
  // only with the inversion walk below, which reuses the same u: both map
  // u < (1-q)^c to 0. It must not run before the branches above — they draw
  // fresh randomness, and a pre-spent squeeze would double-count the zero mass
  // (singleton classes with q > 1/2 sit exactly in that corner).
  const double u = rng.next_double();
  if (u < 1.0 - cq_upper) return 0;  // u < 1 - c*q <= (1-q)^c: count is 0
  double pmf = std::exp(static_cast<double>(eligible) * std::log1p(-q));
  double cdf = pmf;
  if (u < cdf) return 0;
  const double ratio = q / (1.0 - q);
  long k = 0;
  while (cdf <= u && k < eligible) {
    ++k;
    pmf *= ratio * static_cast<double>(eligible - k + 1) / static_cast<double>(k);
    cdf += pmf;
  }
  return k;
}

namespace {

// Membership filter over "already drawn" virtual slots: linear scan while the
// draw count stays small, hash set beyond that.
class SlotSet {
 public:
  explicit SlotSet(long expected) {
    if (expected > kScanLimit) hashed_.emplace();
  }
  bool insert(long slot) {
    if (hashed_) return hashed_->insert(slot).second;
    if (contains(slot)) return false;
    flat_.push_back(slot);
    return true;
  }
  bool contains(long slot) const {
    if (hashed_) return hashed_->count(slot) != 0;
    return std::find(flat_.begin(), flat_.end(), slot) != flat_.end();
  }

 private:
  static constexpr long kScanLimit = 64;
  std::vector<long> flat_;
  std::optional<std::unordered_set<long>> hashed_;
};

}  // namespace

void sample_class_members(const std::int32_t* members, std::size_t member_count,
                          std::span<const std::int32_t> extras,
                          std::span<const std::int32_t> exclusions, long take, long eligible,
                          RngStream& rng, std::vector<std::int32_t>& out) {
  const long total = static_cast<long>(member_count) + static_cast<long>(extras.size());
  const auto slot_id = [&](long slot) {
    return slot < static_cast<long>(member_count)
               ? members[slot]
               : extras[static_cast<std::size_t>(slot) - member_count];
  };
  const auto is_excluded = [&](std::int32_t id) {
    for (std::int32_t e : exclusions)
      if (e == id) return true;
    return false;
  };
  const std::size_t start = out.size();

  if (take * 2 <= eligible) {
    // Sequential rejection sampling: each acceptance is uniform over the
    // not-yet-taken eligible slots, so the emitted order is already a uniform
    // random ordering of a uniform subset.
    SlotSet taken(take);
    long got = 0;
    while (got < take) {
      const long slot = rng.next_index(total);
      const std::int32_t id = slot_id(slot);
      if (is_excluded(id) || !taken.insert(slot)) continue;
      out.push_back(id);
      ++got;
    }
    return;
  }

  // Dense case: mark eligible slots to skip (possibly none), emit the rest in
  // array order, then shuffle the emitted range into a uniform random order.
  SlotSet skipped(eligible - take);
  long to_skip = eligible - take;
  while (to_skip > 0) {
    const long slot = rng.next_index(total);
    if (is_excluded(slot_id(slot)) || !skipped.insert(slot)) continue;
    --to_skip;
  }
  for (long slot = 0; slot < total; ++slot) {
    const std::int32_t id = slot_id(slot);
    if (is_excluded(id) || skipped.contains(slot)) continue;
    out.push_back(id);
  }
  for (std::size_t i = out.size(); i > start + 1; --i) {
    const std::size_t j =
        start + static_cast<std::size_t>(rng.next_index(static_cast<long>(i - start)));
    std::swap(out[i - 1], out[j]);
  }
}

}  // namespace detail

std::vector<std::int32_t> two_stage_oracle(std::span<const long> degrees, std::int32_t exclude_id,
                                           int m, double alpha, double beta, int d,
                                           double n_prime, RngStream& rng) {
  if (m < 0 || degrees.size() < static_cast<std::size_t>(m) + 1)
    throw std::invalid_argument("two_stage_oracle: need degrees.size() >= m + 1");
  const auto n = static_cast<std::int32_t>(degrees.size());
  const auto inclusion_p = [&](std::int32_t id) {
    const double raw = (alpha * static_cast<double>(degrees[static_cast<std::size_t>(id)]) + beta) /
                       n_prime;
    return std::min(1.0, raw);
  };
  // Ranked descending by (degree, random key): a fresh key per entry makes
  // every degree tie uniform.
  struct Ranked {
    long degree;
    std::uint64_t key;
    std::int32_t id;
  };
  const auto take_top = [&](std::vector<Ranked>& pool, std::size_t count) {
    std::sort(pool.begin(), pool.end(), [](const Ranked& x, const Ranked& y) {
      return x.degree != y.degree ? x.degree > y.degree : x.key < y.key;
    });
    if (pool.size() > count) pool.resize(count);
  };

  std::vector<std::int32_t> secondary;  // union of per-sample selections
  std::vector<Ranked> sample;
  for (int s = 0; s < d; ++s) {
    sample.clear();
    for (std::int32_t id = 0; id < n; ++id) {
      if (id == exclude_id) continue;
      if (rng.next_double() < inclusion_p(id))
        sample.push_back({degrees[static_cast<std::size_t>(id)], rng.next_u64(), id});
    }
    take_top(sample, static_cast<std::size_t>(m));
    for (const Ranked& r : sample)
      if (std::find(secondary.begin(), secondary.end(), r.id) == secondary.end())
        secondary.push_back(r.id);
  }

  std::vector<Ranked> pool;
  pool.reserve(secondary.size());
  for (std::int32_t id : secondary)
    pool.push_back({degrees[static_cast<std::size_t>(id)], rng.next_u64(), id});
  take_top(pool, static_cast<std::size_t>(m));

  std::vector<std::int32_t> targets;
  targets.reserve(static_cast<std::size_t>(m));
  for (const Ranked& r : pool) targets.push_back(r.id);
  while (targets.size() < static_cast<std::size_t>(m)) {
    const auto id = static_cast<std::int32_t>(rng.next_index(static_cast<long>(n)));
    if (id == exclude_id) continue;
    if (std::find(targets.begin(), targets.end(), id) != targets.end()) continue;
    targets.push_back(id);
  }
  return targets;
}

}  // namespace sapa
