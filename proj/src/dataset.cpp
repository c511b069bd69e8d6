#include "pif/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pif/errors.hpp"

namespace pif {

SnowballResult snowball_sample(const SparseAdjacency& adj, int seed_node,
                               int target_n, Rng& rng) {
  const int n = adj.n_persons();
  if (seed_node < 0 || seed_node >= n) {
    throw DataError("snowball: seed node out of range");
  }
  if (target_n <= 0 || target_n > n) {
    throw DataError("snowball: target_n=" + std::to_string(target_n) +
                    " not in [1, " + std::to_string(n) + "]");
  }

  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> frontier = {seed_node};
  visited[seed_node] = 1;

  while (static_cast<int>(order.size()) < target_n) {
    if (frontier.empty()) {
      // Component exhausted; restart from an rng-chosen unvisited node.
      std::vector<int> unvisited;
      for (int v = 0; v < n; ++v) {
        if (!visited[v]) unvisited.push_back(v);
      }
      int pick = unvisited[rng.below(static_cast<std::int64_t>(unvisited.size()))];
      visited[pick] = 1;
      frontier = {pick};
    }
    rng.shuffle(frontier.begin(), frontier.end());
    order.insert(order.end(), frontier.begin(), frontier.end());
    std::vector<int> next;
    for (int v : frontier) {
      for (int w : adj.neighbors(v)) {
        if (!visited[w]) {
          visited[w] = 1;
          next.push_back(w);
        }
      }
    }
    frontier = std::move(next);
  }
  order.resize(target_n);

  std::vector<int> old_to_new(n, -1);
  for (int new_id = 0; new_id < target_n; ++new_id) old_to_new[order[new_id]] = new_id;

  std::vector<SparseAdjacency::Edge> edges;
  for (const auto& [i, j] : adj.edges()) {
    if (old_to_new[i] >= 0 && old_to_new[j] >= 0) {
      edges.emplace_back(old_to_new[i], old_to_new[j]);
    }
  }
  return {SparseAdjacency(target_n, std::move(edges)), std::move(old_to_new),
          std::move(order)};
}

namespace {

CountMatrix select_rows(const CountMatrix& m, const std::vector<int>& old_to_new,
                        int n_kept) {
  std::vector<CountEntry> entries;
  for (const auto& e : m.entries()) {
    if (old_to_new[e.row] >= 0) entries.push_back({old_to_new[e.row], e.col, e.count});
  }
  return CountMatrix(n_kept, m.n_cols(), std::move(entries));
}

Grid select_grid_rows(const Grid& g, const std::vector<int>& kept) {
  if (g.size() == 0) return g;
  Grid out(static_cast<Eigen::Index>(kept.size()), g.cols());
  for (std::size_t r = 0; r < kept.size(); ++r) out.row(r) = g.row(kept[r]);
  return out;
}

template <class T>
std::vector<T> select_vec(const std::vector<T>& v, const std::vector<int>& kept) {
  if (v.empty()) return v;
  std::vector<T> out;
  out.reserve(kept.size());
  for (int k : kept) out.push_back(v[k]);
  return out;
}

}  // namespace

DropResult drop_isolated(const Dataset& ds) {
  const int n = ds.adjacency.n_persons();
  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (ds.adjacency.degree(i) > 0) kept.push_back(i);
  }
  if (kept.empty()) throw DataError("drop_isolated: every person is isolated");

  std::vector<int> old_to_new(n, -1);
  for (std::size_t k = 0; k < kept.size(); ++k) old_to_new[kept[k]] = static_cast<int>(k);

  std::vector<SparseAdjacency::Edge> edges;
  for (const auto& [i, j] : ds.adjacency.edges()) {
    edges.emplace_back(old_to_new[i], old_to_new[j]);
  }
  Dataset out;
  out.adjacency = SparseAdjacency(static_cast<int>(kept.size()), std::move(edges));
  out.x = select_rows(ds.x, old_to_new, static_cast<int>(kept.size()));
  out.y = select_rows(ds.y, old_to_new, static_cast<int>(kept.size()));
  if (ds.truth) {
    SimTruth t = *ds.truth;
    t.rho = select_grid_rows(t.rho, kept);
    t.alpha = select_grid_rows(t.alpha, kept);
    if (t.beta.size() > 0) {
      Vec beta(kept.size());
      for (std::size_t k = 0; k < kept.size(); ++k) beta[k] = t.beta[kept[k]];
      t.beta = beta;
    }
    t.person_region = select_vec(t.person_region, kept);
    t.person_group = select_vec(t.person_group, kept);
    std::vector<int> bp, bi;
    std::vector<double> bv;
    for (std::size_t e = 0; e < t.bump_person.size(); ++e) {
      if (old_to_new[t.bump_person[e]] >= 0) {
        bp.push_back(old_to_new[t.bump_person[e]]);
        bi.push_back(t.bump_item[e]);
        bv.push_back(t.bump_value[e]);
      }
    }
    t.bump_person = std::move(bp);
    t.bump_item = std::move(bi);
    t.bump_value = std::move(bv);
    out.truth = std::move(t);
  }
  return {std::move(out), std::move(kept)};
}

HoldoutSplit holdout_split(const CountMatrix& m, double fraction, Rng& rng) {
  if (m.nnz() == 0) throw DataError("holdout_split: empty matrix");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw DataError("holdout_split: fraction must lie in (0, 1)");
  }
  std::vector<CountEntry> train;
  std::set<std::pair<int, int>> mask;
  std::vector<int> idx;
  for (int r = 0; r < m.n_rows(); ++r) {
    auto row = m.row(r);
    const int nnz = static_cast<int>(row.size());
    if (nnz <= 1) {
      train.insert(train.end(), row.begin(), row.end());
      continue;
    }
    const int n_hold = static_cast<int>(std::ceil(fraction * nnz));
    idx.resize(nnz);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    std::vector<char> held(nnz, 0);
    for (int h = 0; h < n_hold && h < nnz; ++h) held[idx[h]] = 1;
    for (int t = 0; t < nnz; ++t) {
      if (held[t]) {
        mask.emplace(row[t].row, row[t].col);
      } else {
        train.push_back(row[t]);
      }
    }
  }
  return {CountMatrix(m.n_rows(), m.n_cols(), std::move(train)), std::move(mask)};
}

CountMatrix adjacency_to_counts(const SparseAdjacency& adj) {
  std::vector<CountEntry> entries;
  entries.reserve(adj.n_edges());
  for (const auto& [i, j] : adj.edges()) entries.push_back({i, j, 1});
  return CountMatrix(adj.n_persons(), adj.n_persons(), std::move(entries));
}

SparseAdjacency counts_to_adjacency(const CountMatrix& m) {
  std::vector<SparseAdjacency::Edge> edges;
  edges.reserve(m.nnz());
  for (const auto& e : m.entries()) edges.emplace_back(e.row, e.col);
  return SparseAdjacency(m.n_rows(), std::move(edges));
}

}  // namespace pif
