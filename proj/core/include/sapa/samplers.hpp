#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sapa/degree_registry.hpp"
#include "sapa/rng.hpp"

namespace sapa {

// Exact Binomial(c, p) variate in expected O(1 + c*p) time: single-uniform
// inversion, complement trick for p > 1/2, and a halving split whenever the
// zero-term (1-p)^c would lose precision. Uses only RngStream draws, so the
// result is identical on every platform.
long binomial(long c, double p, RngStream& rng);

namespace detail {

double pow_int(double x, int n);

// Exact Binomial(eligible, q) count by single-uniform inversion, with a cheap
// zero-rejection: u < 1 - cq_upper <= (1-q)^eligible certifies count 0 from
// one comparison. cq_upper must satisfy eligible*q <= cq_upper.
long included_count(long eligible, double q, double cq_upper, RngStream& rng);

// Append `take` ids chosen uniformly without replacement from the eligible
// entries of one degree class (members array plus zero-degree extras, minus
// excluded ids), in uniformly random order. `eligible` is the caller-counted
// number of non-excluded entries. Expected cost O(take) for small take,
// O(member_count + extras) when take is a constant fraction of eligible.
void sample_class_members(const std::int32_t* members, std::size_t member_count,
                          std::span<const std::int32_t> extras,
                          std::span<const std::int32_t> exclusions, long take, long eligible,
                          RngStream& rng, std::vector<std::int32_t>& out);

}  // namespace detail

// One union of d Bernoulli-inclusion samples over all registry vertices plus
// extra_zero_degree ids (candidates not yet registered, treated as degree 0),
// minus exclusions: each candidate with degree g enters independently with
// probability 1 - (1 - p_of_degree(g))^d. Output ids are in decreasing degree
// order; within one degree class the order is a uniform random permutation of
// the included members, so a prefix cut breaks degree ties uniformly.
// Cost O(#distinct degrees + output size) per call.
//
// Preconditions: p_of_degree maps long degree -> [0,1]; extra_zero_degree ids
// are not present in the registry.
template <class ProbFn>
void class_union_sample(const DegreeClassRegistry& registry,
                        std::span<const std::int32_t> exclusions,
                        std::span<const std::int32_t> extra_zero_degree, ProbFn&& p_of_degree,
                        int d, RngStream& rng, std::vector<std::int32_t>& out) {
  out.clear();
  const auto is_excluded = [&](std::int32_t id) {
    for (std::int32_t e : exclusions)
      if (e == id) return true;
    return false;
  };

  long extras_pending = 0;
  for (std::int32_t id : extra_zero_degree)
    if (!is_excluded(id)) ++extras_pending;

  const auto process = [&](long degree, const std::int32_t* members, std::size_t member_count,
                           std::span<const std::int32_t> extras, long eligible) {
    if (eligible <= 0) return;
    const double p = p_of_degree(degree);
    const double q = p >= 1.0 ? 1.0 : 1.0 - detail::pow_int(1.0 - p, d);
    const double cq_upper = static_cast<double>(eligible) * d * p;
    const long take = detail::included_count(eligible, q, cq_upper, rng);
    if (take > 0)
      detail::sample_class_members(members, member_count, extras, exclusions, take, eligible, rng,
                                   out);
  };

  for (std::int32_t node = registry.head(); node != DegreeClassRegistry::npos;
       node = registry.next(node)) {
    const DegreeClassRegistry::ClassView cls = registry.view(node);
    long excluded_here = 0;
    for (std::int32_t e : exclusions)
      if (registry.contains(e) && registry.class_of(e) == node) ++excluded_here;
    const bool absorbs_extras = cls.degree == 0;  // always the lowest class
    const long eligible = static_cast<long>(cls.count) - excluded_here +
                          (absorbs_extras ? extras_pending : 0);
    process(cls.degree, cls.members, cls.count,
            absorbs_extras ? extra_zero_degree : std::span<const std::int32_t>{}, eligible);
    if (absorbs_extras) extras_pending = 0;
  }
  if (extras_pending > 0) process(0, nullptr, 0, extra_zero_degree, extras_pending);
}

// Literal two-stage edge-step procedure over a frozen degree snapshot (test
// oracle, O(n*d) per call). Candidates are all indices of `degrees` except
// exclude_id, each entering every one of the d samples independently with
// probability min(1, (alpha*degree + beta)/n_prime). From each sample the
// min(m, sample size) highest-degree members pass to a secondary pool (degree
// ties broken uniformly); the result is the m highest-degree distinct pool
// members, topped up to exactly m ids by uniform draws without replacement
// over the remaining candidates when the pool runs short.
//
// Precondition: degrees.size() >= m + 1 (enough candidates to fill).
std::vector<std::int32_t> two_stage_oracle(std::span<const long> degrees, std::int32_t exclude_id,
                                           int m, double alpha, double beta, int d,
                                           double n_prime, RngStream& rng);

}  // namespace sapa
