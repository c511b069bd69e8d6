#include "pif/exposure.hpp"

#include "pif/errors.hpp"

namespace pif {

ExposureIndex::ExposureIndex(const SparseAdjacency& adj, const CountMatrix& x,
                             bool binarize)
    : adj_(&adj), binarize_(binarize) {
  const int n = adj.n_persons();
  const int m = x.n_cols();
  if (x.n_rows() != n) {
    throw DataError("exposure: x rows must match the number of persons");
  }
  totals_.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double mass = binarize ? static_cast<double>(x.row_nnz(j))
                                 : static_cast<double>(x.row_sum(j));
    totals_[j] = static_cast<double>(adj.degree(j)) * mass;
  }

  item_offsets_.assign(m + 1, 0);
  for (const auto& e : x.entries()) ++item_offsets_[e.col + 1];
  for (int k = 0; k < m; ++k) item_offsets_[k + 1] += item_offsets_[k];
  buyer_.resize(x.nnz());
  weight_.resize(x.nnz());
  std::vector<int> cursor(item_offsets_.begin(), item_offsets_.end() - 1);
  for (const auto& e : x.entries()) {
    const int pos = cursor[e.col]++;
    buyer_[pos] = e.row;
    weight_[pos] = binarize ? 1.0 : static_cast<double>(e.count);
  }
}

std::vector<std::pair<int, double>> ExposureIndex::gather(int i, int k) const {
  std::vector<std::pair<int, double>> out;
  const int lo = item_offsets_[k];
  const int hi = item_offsets_[k + 1];
  for (int pos = lo; pos < hi; ++pos) {
    const int j = buyer_[pos];
    if (j != i && adj_->has_edge(i, j)) out.emplace_back(j, weight_[pos]);
  }
  return out;
}

ExposureIndex build_exposure(const SparseAdjacency& adj, const CountMatrix& x,
                             bool binarize) {
  return ExposureIndex(adj, x, binarize);
}

}  // namespace pif
