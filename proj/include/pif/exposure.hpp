#ifndef PIF_EXPOSURE_HPP
#define PIF_EXPOSURE_HPP

#include <utility>
#include <vector>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"

namespace pif {

// Sparse view of the exposure term: for a cell (i, k) the peers j of i with
// x_jk > 0 contribute a_ij * x_jk (or 1 when binarized). Also carries the
// per-person totals T_j = sum_{i,k} a_ij x_jk, which are the fixed part of
// the influence rate denominators.
class ExposureIndex {
 public:
  ExposureIndex(const SparseAdjacency& adj, const CountMatrix& x, bool binarize);

  // Peers of i that bought k yesterday, with their exposure weights.
  std::vector<std::pair<int, double>> gather(int i, int k) const;

  double total(int j) const { return totals_[j]; }
  const std::vector<double>& totals() const { return totals_; }
  bool binarized() const { return binarize_; }
  const SparseAdjacency& adjacency() const { return *adj_; }

 private:
  const SparseAdjacency* adj_;
  bool binarize_;
  std::vector<double> totals_;
  // Buyers of each item as CSR over items.
  std::vector<int> item_offsets_;
  std::vector<int> buyer_;
  std::vector<double> weight_;
};

ExposureIndex build_exposure(const SparseAdjacency& adj, const CountMatrix& x,
                             bool binarize);

}  // namespace pif

#endif
