#ifndef PIF_ADJACENCY_HPP
#define PIF_ADJACENCY_HPP

#include <span>
#include <utility>
#include <vector>

namespace pif {

// Undirected binary network. Edges are stored once as (i, j) with i < j;
// a per-node CSR neighbor index is built on construction for traversal.
class SparseAdjacency {
 public:
  using Edge = std::pair<int, int>;

  SparseAdjacency() = default;
  // Deduplicates and canonicalizes pairs; throws DataError on self-loops or
  // out-of-range indices.
  SparseAdjacency(int n_persons, std::vector<Edge> edges);

  int n_persons() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t n_edges() const { return edges_.size(); }

  std::span<const int> neighbors(int i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return offsets_[i + 1] - offsets_[i]; }
  bool has_edge(int i, int j) const;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;     // canonical i < j, sorted, unique
  std::vector<int> offsets_;    // CSR offsets, size n + 1
  std::vector<int> adj_;        // concatenated sorted neighbor lists
};

}  // namespace pif

#endif
