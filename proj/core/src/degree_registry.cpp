#include "sapa/degree_registry.hpp"

#include <algorithm>
#include <stdexcept>

namespace sapa {

void DegreeClassRegistry::clear() {
  pool_.clear();
  free_nodes_.clear();
  where_.clear();
  head_ = npos;
  vertex_count_ = 0;
  num_classes_ = 0;
  total_degree_ = 0;
}

std::int32_t DegreeClassRegistry::acquire_node(long degree) {
  std::int32_t node;
  if (!free_nodes_.empty()) {
    node = free_nodes_.back();
    free_nodes_.pop_back();
  } else {
    node = static_cast<std::int32_t>(pool_.size());
    pool_.emplace_back();
  }
  pool_[node].degree = degree;
  pool_[node].prev = npos;
  pool_[node].next = npos;
  pool_[node].members.clear();  // keeps capacity
  ++num_classes_;
  return node;
}

void DegreeClassRegistry::release_node(std::int32_t node) {
  Node& nd = pool_[node];
  if (nd.prev != npos)
    pool_[nd.prev].next = nd.next;
  else
    head_ = nd.next;
  if (nd.next != npos) pool_[nd.next].prev = nd.prev;
  nd.prev = nd.next = npos;
  free_nodes_.push_back(node);
  --num_classes_;
}

void DegreeClassRegistry::remove_member(std::int32_t node, std::int32_t slot) {
  auto& members = pool_[node].members;
  const std::int32_t last = members.back();
  members.pop_back();
  if (slot < static_cast<std::int32_t>(members.size())) {
    members[slot] = last;
    where_[last].slot = slot;
  }
}

void DegreeClassRegistry::push_member(std::int32_t node, std::int32_t id) {
  auto& members = pool_[node].members;
  where_[id].node = node;
  where_[id].slot = static_cast<std::int32_t>(members.size());
  members.push_back(id);
}

std::int32_t DegreeClassRegistry::find_or_create_above(std::int32_t below_node, long degree) {
  // Search downward from head when no anchor; otherwise degree == below.degree+1
  // and the only candidate is below's predecessor.
  if (below_node != npos) {
    const std::int32_t cand = pool_[below_node].prev;
    if (cand != npos && pool_[cand].degree == degree) return cand;
    const std::int32_t node = acquire_node(degree);
    pool_[node].prev = cand;
    pool_[node].next = below_node;
    pool_[below_node].prev = node;
    if (cand != npos)
      pool_[cand].next = node;
    else
      head_ = node;
    return node;
  }
  // General insertion: walk from head until a class of <= degree.
  std::int32_t prev = npos;
  std::int32_t cur = head_;
  while (cur != npos && pool_[cur].degree > degree) {
    prev = cur;
    cur = pool_[cur].next;
  }
  if (cur != npos && pool_[cur].degree == degree) return cur;
  const std::int32_t node = acquire_node(degree);
  pool_[node].prev = prev;
  pool_[node].next = cur;
  if (prev != npos)
    pool_[prev].next = node;
  else
    head_ = node;
  if (cur != npos) pool_[cur].prev = node;
  return node;
}

void DegreeClassRegistry::insert_vertex(std::int32_t id, long degree) {
  if (id < 0) throw std::invalid_argument("DegreeClassRegistry: negative id");
  if (degree < 0) throw std::invalid_argument("DegreeClassRegistry: negative degree");
  if (static_cast<std::size_t>(id) >= where_.size()) where_.resize(static_cast<std::size_t>(id) + 1);
  if (where_[id].node != npos) throw std::invalid_argument("DegreeClassRegistry: duplicate id");
  const std::int32_t node = find_or_create_above(npos, degree);
  push_member(node, id);
  ++vertex_count_;
  total_degree_ += degree;
}

void DegreeClassRegistry::increment_degree(std::int32_t id) {
  if (!contains(id)) throw std::invalid_argument("DegreeClassRegistry: unknown id");
  const Ref ref = where_[id];
  const long degree = pool_[ref.node].degree;
  const std::int32_t target = find_or_create_above(ref.node, degree + 1);
  remove_member(ref.node, ref.slot);
  push_member(target, id);
  if (pool_[ref.node].members.empty()) release_node(ref.node);
  ++total_degree_;
}

void DegreeClassRegistry::top_degrees(int k, long* out) const {
  int filled = 0;
  for (std::int32_t node = head_; node != npos && filled < k; node = pool_[node].next) {
    const Node& nd = pool_[node];
    const int take = static_cast<int>(
        std::min<long>(static_cast<long>(nd.members.size()), k - filled));
    for (int i = 0; i < take; ++i) out[filled++] = nd.degree;
  }
  while (filled < k) out[filled++] = 0;
}

long DegreeClassRegistry::kth_degree(int k) const {
  long remaining = k;
  for (std::int32_t node = head_; node != npos; node = pool_[node].next) {
    remaining -= static_cast<long>(pool_[node].members.size());
    if (remaining <= 0) return pool_[node].degree;
  }
  return 0;
}

bool DegreeClassRegistry::audit(std::span<const long> degrees) const {
  long seen = 0;
  long degree_sum = 0;
  long classes = 0;
  long previous = -1;
  for (std::int32_t node = head_; node != npos; node = pool_[node].next) {
    const Node& nd = pool_[node];
    if (nd.members.empty()) return false;
    if (previous >= 0 && nd.degree >= previous) return false;  // strictly decreasing
    previous = nd.degree;
    ++classes;
    for (std::size_t slot = 0; slot < nd.members.size(); ++slot) {
      const std::int32_t id = nd.members[slot];
      if (id < 0 || static_cast<std::size_t>(id) >= degrees.size()) return false;
      if (degrees[static_cast<std::size_t>(id)] != nd.degree) return false;
      if (where_[id].node != node || where_[id].slot != static_cast<std::int32_t>(slot)) return false;
      ++seen;
      degree_sum += nd.degree;
    }
  }
  return seen == vertex_count_ && seen == static_cast<long>(degrees.size()) &&
         classes == num_classes_ && degree_sum == total_degree_;
}

}  // namespace sapa
