#ifndef PIF_DATASET_HPP
#define PIF_DATASET_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"
#include "pif/grids.hpp"
#include "pif/rng.hpp"

namespace pif {

// Ground truth carried alongside simulated datasets. The preference grids
// keep the generative-process naming; `beta` is the per-person influence.
// `bump_*` holds the additive shared-preference rates injected by the
// sensitivity violation, kept separate so the clean truth stays available.
struct SimTruth {
  Grid rho;    // persons x regions
  Grid gamma;  // items x regions
  Grid tau;    // items x groups
  Grid alpha;  // persons x groups
  Vec beta;    // persons

  std::vector<int> person_region;
  std::vector<int> item_region;
  std::vector<int> person_group;
  std::vector<int> item_group;

  std::vector<int> bump_person;
  std::vector<int> bump_item;
  std::vector<double> bump_value;
  int violation_edges = 0;
};

struct Dataset {
  SparseAdjacency adjacency;
  CountMatrix x;  // yesterday
  CountMatrix y;  // today
  std::optional<SimTruth> truth;
};

// Layered breadth-first subgraph extraction. Whole frontier layers are
// appended (shuffled within a layer) until target_n nodes are collected,
// then the list is truncated to exactly target_n and the induced subgraph
// returned. When a component is exhausted early the walk restarts from an
// rng-chosen unvisited node.
struct SnowballResult {
  SparseAdjacency subgraph;
  std::vector<int> old_to_new;  // -1 for dropped nodes
  std::vector<int> kept;        // new id -> old id
};
SnowballResult snowball_sample(const SparseAdjacency& adj, int seed_node,
                               int target_n, Rng& rng);

// Removes zero-degree persons and reindexes adjacency, x, y (and truth
// person rows) consistently.
struct DropResult {
  Dataset dataset;
  std::vector<int> kept;  // new id -> old id
};
DropResult drop_isolated(const Dataset& ds);

// Per row, ceil(fraction * nnz) entries move from the support into the
// heldout mask (zeroed in train); rows with a single nonzero entry are left
// intact.
struct HoldoutSplit {
  CountMatrix train;
  std::set<std::pair<int, int>> mask;
};
HoldoutSplit holdout_split(const CountMatrix& m, double fraction, Rng& rng);

// Upper-triangle view of the network as a binary count matrix, used by the
// model checks to reuse the count-matrix holdout machinery.
CountMatrix adjacency_to_counts(const SparseAdjacency& adj);
SparseAdjacency counts_to_adjacency(const CountMatrix& m);

}  // namespace pif

#endif
