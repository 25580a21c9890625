#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sapa {

// Vertices grouped by exact in-degree, iterable in strictly decreasing degree
// order. Buckets support O(1) swap-remove; degree increments are O(1) because
// the class one degree above (when it exists) is always the list predecessor.
class DegreeClassRegistry {
 public:
  static constexpr std::int32_t npos = -1;

  struct ClassView {
    long degree;
    const std::int32_t* members;
    std::int32_t count;
  };

  void clear();

  // id must be fresh (never inserted); degree >= 0.
  void insert_vertex(std::int32_t id, long degree = 0);

  void increment_degree(std::int32_t id);

  long degree_of(std::int32_t id) const { return pool_[where_[id].node].degree; }
  bool contains(std::int32_t id) const {
    return id >= 0 && static_cast<std::size_t>(id) < where_.size() && where_[id].node != npos;
  }

  long vertex_count() const { return vertex_count_; }
  long num_classes() const { return num_classes_; }
  long total_degree() const { return total_degree_; }

  // Highest degree (0 on an empty registry).
  long max_degree() const { return head_ == npos ? 0 : pool_[head_].degree; }

  // Fills out[0..k-1] with the k highest in-degrees counted with multiplicity
  // (0-padded past the vertex count).
  void top_degrees(int k, long* out) const;
  long kth_degree(int k) const;

  // Class-chain access in decreasing degree order.
  std::int32_t head() const { return head_; }
  std::int32_t next(std::int32_t node) const { return pool_[node].next; }
  ClassView view(std::int32_t node) const {
    const Node& nd = pool_[node];
    return {nd.degree, nd.members.data(), static_cast<std::int32_t>(nd.members.size())};
  }
  std::int32_t class_of(std::int32_t id) const { return where_[id].node; }

  template <class F>
  void for_each_class_desc(F&& f) const {
    for (std::int32_t node = head_; node != npos; node = pool_[node].next) {
      const Node& nd = pool_[node];
      f(nd.degree, std::span<const std::int32_t>(nd.members.data(), nd.members.size()));
    }
  }

  // Full consistency check against the authoritative degree array (tests):
  // every id in exactly one bucket matching degrees[id], buckets nonempty,
  // strictly decreasing chain, cached counts correct.
  bool audit(std::span<const long> degrees) const;

 private:
  struct Node {
    long degree = 0;
    std::int32_t prev = npos;  // toward higher degree
    std::int32_t next = npos;  // toward lower degree
    std::vector<std::int32_t> members;
  };
  struct Ref {
    std::int32_t node = npos;
    std::int32_t slot = npos;
  };

  std::int32_t acquire_node(long degree);
  void release_node(std::int32_t node);
  void remove_member(std::int32_t node, std::int32_t slot);
  void push_member(std::int32_t node, std::int32_t id);
  // Node with this exact degree adjacent to `after_hint`, creating and linking
  // it if needed; hint must be the node just below (next toward lower degree)
  // or npos when inserting at the tail/head region.
  std::int32_t find_or_create_above(std::int32_t below_node, long degree);

  std::vector<Node> pool_;
  std::vector<std::int32_t> free_nodes_;
  std::vector<Ref> where_;
  std::int32_t head_ = npos;
  long vertex_count_ = 0;
  long num_classes_ = 0;
  long total_degree_ = 0;
};

}  // namespace sapa
