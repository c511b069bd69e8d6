#ifndef PIF_IO_HPP
#define PIF_IO_HPP

#include <string>

#include "pif/adjacency.hpp"
#include "pif/count_matrix.hpp"
#include "pif/grids.hpp"

namespace pif {

// Tab-separated "i<TAB>j" lines, '#' comments, optional "n=<int>" header.
// Reversed and duplicate pairs are merged; n defaults to 1 + max index.
SparseAdjacency load_edgelist(const std::string& path);
void save_edgelist(const SparseAdjacency& adj, const std::string& path);

// "row<TAB>col<TAB>count" lines, '#' comments, optional "shape=<r>,<c>"
// header (must match the passed dimensions when both are given). Zero counts
// are dropped and duplicates summed. Pass n_rows = n_cols = 0 to take the
// shape from the header.
CountMatrix load_counts(const std::string& path, int n_rows = 0, int n_cols = 0);
void save_counts(const CountMatrix& m, const std::string& path);

// Dense grid as TSV with a shape header; values round-trip exactly.
Grid load_grid(const std::string& path);
void save_grid(const Grid& g, const std::string& path);

// 17-significant-digit formatting; the common spelling for every emitted file.
std::string format_double(double v);

}  // namespace pif

#endif
