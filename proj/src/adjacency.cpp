#include "pif/adjacency.hpp"

#include <algorithm>
#include <string>

#include "pif/errors.hpp"

namespace pif {

SparseAdjacency::SparseAdjacency(int n_persons, std::vector<Edge> edges)
    : n_(n_persons) {
  if (n_persons <= 0) {
    throw DataError("adjacency: n_persons must be positive");
  }
  for (auto& [i, j] : edges) {
    if (i == j) {
      throw DataError("adjacency: self-loop at node " + std::to_string(i));
    }
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw DataError("adjacency: edge (" + std::to_string(i) + ", " +
                      std::to_string(j) + ") out of range for n=" +
                      std::to_string(n_));
    }
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  std::vector<int> deg(n_, 0);
  for (const auto& [i, j] : edges_) {
    ++deg[i];
    ++deg[j];
  }
  offsets_.assign(n_ + 1, 0);
  for (int i = 0; i < n_; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.resize(offsets_[n_]);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [i, j] : edges_) {
    adj_[cursor[i]++] = j;
    adj_[cursor[j]++] = i;
  }
  for (int i = 0; i < n_; ++i) {
    std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
  }
}

bool SparseAdjacency::has_edge(int i, int j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

}  // namespace pif
