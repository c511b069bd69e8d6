#include "pif/count_matrix.hpp"

#include <algorithm>
#include <string>

#include "pif/errors.hpp"

namespace pif {

CountMatrix::CountMatrix(int n_rows, int n_cols, std::vector<CountEntry> entries)
    : n_rows_(n_rows), n_cols_(n_cols) {
  if (n_rows <= 0 || n_cols <= 0) {
    throw DataError("count matrix: dimensions must be positive");
  }
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= n_rows_ || e.col < 0 || e.col >= n_cols_) {
      throw DataError("count matrix: entry (" + std::to_string(e.row) + ", " +
                      std::to_string(e.col) + ") out of range for shape " +
                      std::to_string(n_rows_) + "x" + std::to_string(n_cols_));
    }
    if (e.count < 0) {
      throw DataError("count matrix: negative count at (" +
                      std::to_string(e.row) + ", " + std::to_string(e.col) + ")");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const CountEntry& a, const CountEntry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col) {
      entries_.back().count += e.count;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const CountEntry& e) { return e.count == 0; });

  offsets_.assign(n_rows_ + 1, 0);
  for (const auto& e : entries_) ++offsets_[e.row + 1];
  for (int r = 0; r < n_rows_; ++r) offsets_[r + 1] += offsets_[r];
}

long CountMatrix::row_sum(int r) const {
  long s = 0;
  for (const auto& e : row(r)) s += e.count;
  return s;
}

long CountMatrix::total() const {
  long s = 0;
  for (const auto& e : entries_) s += e.count;
  return s;
}

long CountMatrix::at(int r, int c) const {
  auto rr = row(r);
  auto it = std::lower_bound(rr.begin(), rr.end(), c,
                             [](const CountEntry& e, int col) { return e.col < col; });
  return (it != rr.end() && it->col == c) ? it->count : 0;
}

CountMatrix CountMatrix::binarized() const {
  std::vector<CountEntry> bin(entries_);
  for (auto& e : bin) e.count = 1;
  return CountMatrix(n_rows_, n_cols_, std::move(bin));
}

}  // namespace pif
